//! JSON file formats.
//!
//! Instance file:
//!
//! ```json
//! {"p": 2, "mode": "linear", "matrix": [["1/2", "0"], ["0", "1/2"]], "seed": ["1", "1"]}
//! ```
//!
//! Rationals are always strings (`"a"` or `"a/b"`). Validation errors name
//! the offending field, e.g. `matrix[1][0]: malformed rational "x"`.

use std::fs;
use std::path::Path;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::dynamics::{DucciInstance, IterationMode, OrbitReport};
use crate::error::{LoadError, ParseError};
use crate::linalg::{RationalMatrix, RationalVector};
use crate::padic::{format_rational, parse_rational, Prime};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub p: i64,
    pub mode: String,
    pub matrix: Vec<Vec<String>>,
    pub seed: Vec<String>,
}

impl InstanceFile {
    pub fn from_instance(inst: &DucciInstance) -> Self {
        InstanceFile {
            p: inst.p().get() as i64,
            mode: inst.mode().as_str().to_string(),
            matrix: matrix_strings(inst.matrix()),
            seed: vector_strings(inst.seed()),
        }
    }

    pub fn validate(&self) -> Result<DucciInstance, ParseError> {
        let p = u64::try_from(self.p)
            .map_err(|_| ParseError::NotPrime(0))
            .and_then(Prime::new)
            .map_err(|_| ParseError::Schema(format!("p must be prime (got {})", self.p)).at("p"))?;
        let mode: IterationMode = self.mode.parse().map_err(|e: ParseError| e.at("mode"))?;
        let rows = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| parse_rational(s).map_err(|e| e.at(format!("matrix[{i}][{j}]"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let seed = self
            .seed
            .iter()
            .enumerate()
            .map(|(i, s)| parse_rational(s).map_err(|e| e.at(format!("seed[{i}]"))))
            .collect::<Result<RationalVector, _>>()?;
        let matrix = RationalMatrix::from_rows(rows)
            .map_err(|e| ParseError::Dimension(strip_prefix(&e.to_string())).at("matrix"))?;
        DucciInstance::new(p, matrix, seed, mode).map_err(|e| e.at("seed"))
    }
}

fn strip_prefix(msg: &str) -> String {
    msg.trim_start_matches("dimension mismatch: ").to_string()
}

pub fn matrix_strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.rows()
        .map(|r| r.iter().map(format_rational).collect())
        .collect()
}

pub fn vector_strings(v: &RationalVector) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn parse_instance_str(text: &str) -> Result<DucciInstance, ParseError> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| ParseError::Schema(format!("invalid instance JSON: {e}")))?;
    file.validate()
}

pub fn parse_instance_file(path: &Path) -> Result<DucciInstance, LoadError> {
    let text = read(path)?;
    Ok(parse_instance_str(&text)?)
}

pub fn instance_to_json(inst: &DucciInstance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(inst)).expect("plain data serializes")
}

pub fn write_instance_file(path: &Path, inst: &DucciInstance) -> std::io::Result<()> {
    fs::write(path, instance_to_json(inst) + "\n")
}

pub(crate) fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl Serialize for OrbitReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OrbitReport", 6)?;
        st.serialize_field("outcome", &self.outcome)?;
        st.serialize_field("preperiod", &self.preperiod())?;
        st.serialize_field("period", &self.period())?;
        st.serialize_field("steps", &self.steps())?;
        st.serialize_field("states_visited", &self.states_visited)?;
        let trace: Vec<[Value; 2]> = self
            .valuation_trace
            .iter()
            .map(|(lo, hi)| {
                [
                    serde_json::to_value(lo).expect("valuation"),
                    serde_json::to_value(hi).expect("valuation"),
                ]
            })
            .collect();
        st.serialize_field("valuation_trace", &trace)?;
        st.end()
    }
}
