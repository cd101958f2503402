//! Seeded instance generation and prediction-vs-observation sweeps.
//!
//! Every (profile, instance) pair draws from its own ChaCha stream keyed by
//! `(rng_seed, profile index, instance index)`, so generation does not
//! depend on worker count or scheduling. Results are merged in instance
//! order.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_orbit, DucciInstance, IterationMode, OrbitLimits, OrbitReport, Outcome};
use crate::error::{HarnessError, LoadError, ParseError};
use crate::linalg::{RationalMatrix, RationalVector};
use crate::padic::{is_p_integer, parse_rational, vp, Prime, Rational, Valuation};
use crate::schema::{matrix_strings, read, vector_strings};
use crate::spectral::{
    analyze, Claim, NormModeClaim, Prediction, SpectrumClass, DEFAULT_MAX_ORDER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileKind {
    /// Every entry has `v_p >= 1`.
    ContractiveEntries,
    /// Upper triangular, ones on the diagonal, `Z_p` entries above it.
    UnitTriangular,
    Permutation,
    /// Nonzero rational diagonal.
    DiagonalRandom,
    /// Diagonal with every entry of negative valuation.
    ExpansiveDiagonal,
    DenseRandom,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::ContractiveEntries => "CONTRACTIVE_ENTRIES",
            ProfileKind::UnitTriangular => "UNIT_TRIANGULAR",
            ProfileKind::Permutation => "PERMUTATION",
            ProfileKind::DiagonalRandom => "DIAGONAL_RANDOM",
            ProfileKind::ExpansiveDiagonal => "EXPANSIVE_DIAGONAL",
            ProfileKind::DenseRandom => "DENSE_RANDOM",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorProfile {
    pub kind: ProfileKind,
    pub n: usize,
    pub p: Prime,
    /// Bound on numerators, denominators and exponents.
    pub value_bound: u64,
}

impl GeneratorProfile {
    pub fn new(kind: ProfileKind, n: usize, p: Prime, value_bound: u64) -> Self {
        GeneratorProfile {
            kind,
            n,
            p,
            value_bound,
        }
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        if self.n == 0 {
            return Err(ParseError::Schema(
                "profile dimension n must be positive".into(),
            ));
        }
        if self.value_bound == 0 {
            return Err(ParseError::Schema(
                "profile value_bound must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}/n{}/p{}", self.kind, self.n, self.p)
    }

    /// The defining predicate of the profile's matrix family.
    pub fn admits(&self, m: &RationalMatrix) -> bool {
        let p = self.p;
        let n = m.dim();
        n == self.n
            && match self.kind {
                ProfileKind::ContractiveEntries => {
                    m.entries().all(|x| vp(x, p) >= Valuation::Finite(1))
                }
                ProfileKind::UnitTriangular => {
                    m.is_upper_triangular()
                        && m.diagonal_entries().iter().all(One::is_one)
                        && m.entries().all(|x| is_p_integer(x, p))
                }
                ProfileKind::Permutation => {
                    let zero_one = m.entries().all(|x| x.is_zero() || x.is_one());
                    let rows_ok = m
                        .rows()
                        .all(|r| r.iter().filter(|x| x.is_one()).count() == 1);
                    let cols_ok =
                        (0..n).all(|j| (0..n).filter(|&i| m.get(i, j).is_one()).count() == 1);
                    zero_one && rows_ok && cols_ok
                }
                ProfileKind::DiagonalRandom => {
                    m.is_diagonal() && m.diagonal_entries().iter().all(|x| !x.is_zero())
                }
                ProfileKind::ExpansiveDiagonal => {
                    m.is_diagonal()
                        && m.diagonal_entries()
                            .iter()
                            .all(|x| vp(x, p) < Valuation::Finite(0))
                }
                ProfileKind::DenseRandom => true,
            }
    }
}

/// Numerator uniform in `[-b, b]`, denominator uniform in `[1, b]`.
fn random_rational(rng: &mut impl Rng, bound: u64) -> Rational {
    let b = bound as i64;
    Rational::new(
        BigInt::from(rng.gen_range(-b..=b)),
        BigInt::from(rng.gen_range(1..=b)),
    )
}

fn random_nonzero(rng: &mut impl Rng, bound: u64) -> Rational {
    loop {
        let x = random_rational(rng, bound);
        if !x.is_zero() {
            return x;
        }
    }
}

fn strip_p(mut n: BigInt, p: &BigInt) -> BigInt {
    if n.is_zero() {
        return n;
    }
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return n;
        }
        n = q;
    }
}

/// Removes every factor of `p` from the denominator, landing in `Z_p`.
fn to_p_integer(x: Rational, p: Prime) -> Rational {
    let (num, den) = x.into();
    Rational::new(num, strip_p(den, &p.as_bigint()))
}

/// Removes every factor of `p`, landing in `Z_p^x` (or zero).
fn to_p_unit(x: Rational, p: Prime) -> Rational {
    let pb = p.as_bigint();
    let (num, den) = x.into();
    Rational::new(strip_p(num, &pb), strip_p(den, &pb))
}

fn random_seed(rng: &mut impl Rng, n: usize, bound: u64) -> RationalVector {
    loop {
        let v: RationalVector = (0..n).map(|_| random_rational(rng, bound)).collect();
        if !v.is_zero() {
            return v;
        }
    }
}

/// Draws one instance of the profile's family. Deterministic in `rng`.
pub fn gen_instance(
    profile: &GeneratorProfile,
    mode: IterationMode,
    rng: &mut impl Rng,
) -> DucciInstance {
    let GeneratorProfile {
        kind,
        n,
        p,
        value_bound: b,
    } = *profile;
    let p_rat = Rational::from_integer(p.as_bigint());
    let matrix = match kind {
        ProfileKind::ContractiveEntries => {
            RationalMatrix::from_fn(n, |_, _| to_p_integer(random_rational(rng, b), p) * &p_rat)
        }
        ProfileKind::UnitTriangular => RationalMatrix::from_fn(n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => Rational::one(),
            std::cmp::Ordering::Less => to_p_integer(random_rational(rng, b), p),
            std::cmp::Ordering::Greater => Rational::zero(),
        }),
        ProfileKind::Permutation => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            RationalMatrix::from_fn(n, |i, j| {
                if perm[i] == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
        }
        ProfileKind::DiagonalRandom => {
            let d: Vec<Rational> = (0..n).map(|_| random_nonzero(rng, b)).collect();
            RationalMatrix::diagonal(&d)
        }
        ProfileKind::ExpansiveDiagonal => {
            let d: Vec<Rational> = (0..n)
                .map(|_| {
                    let unit = to_p_unit(random_nonzero(rng, b), p);
                    let e = rng.gen_range(1..=b as i64);
                    unit * p.pow(-e)
                })
                .collect();
            RationalMatrix::diagonal(&d)
        }
        ProfileKind::DenseRandom => RationalMatrix::from_fn(n, |_, _| random_rational(rng, b)),
    };
    let seed = random_seed(rng, n, b);
    debug_assert!(
        profile.admits(&matrix),
        "{kind} generator broke its predicate"
    );
    DucciInstance::new(p, matrix, seed, mode).expect("generated dimensions agree")
}

/// Independent random stream for one (profile, instance) pair.
pub fn instance_rng(rng_seed: u64, profile_index: usize, instance_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(((profile_index as u64) << 32) | instance_index as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Unresolved,
}

/// The logic table relating a claim to an observed outcome. `Refuted` only
/// on logical contradiction; threshold crossings and budget exhaustion never
/// refute anything.
pub fn judge(claim: Claim, outcome: &Outcome) -> Verdict {
    use Verdict::*;
    match (claim, *outcome) {
        (_, Outcome::Unresolved { .. }) => Unresolved,
        (Claim::Indeterminate, _) => Unresolved,
        (Claim::Terminates, Outcome::Terminated { .. } | Outcome::NormVanished { .. }) => Confirmed,
        // a cycle never contains the zero state: it would have terminated
        (Claim::Terminates, Outcome::Cycle { .. }) => Refuted,
        (Claim::Terminates, Outcome::NormDiverged { .. }) => Unresolved,
        // zero seed: the remaining claims assume a nonzero seed
        (_, Outcome::Terminated { step: 0 }) => Unresolved,
        (Claim::NonVanishing { .. }, Outcome::Terminated { .. }) => Refuted,
        (
            Claim::NonVanishing {
                period_divides: Some(m),
            },
            Outcome::Cycle { period, .. },
        ) => {
            if m % period == 0 {
                Confirmed
            } else {
                Refuted
            }
        }
        (
            Claim::NonVanishing {
                period_divides: None,
            },
            Outcome::Cycle { .. },
        ) => Confirmed,
        (Claim::NonVanishing { .. }, _) => Unresolved,
        (Claim::UnboundedGrowth, Outcome::NormDiverged { .. }) => Confirmed,
        (Claim::UnboundedGrowth, Outcome::Cycle { .. } | Outcome::Terminated { .. }) => Refuted,
        (Claim::UnboundedGrowth, Outcome::NormVanished { .. }) => Unresolved,
    }
}

/// Checks a norm-mode outcome against the diagonal law.
pub fn judge_norm_law(claim: NormModeClaim, outcome: &Outcome) -> Option<Verdict> {
    if claim != NormModeClaim::DiagonalPeriodic {
        return None;
    }
    Some(match *outcome {
        Outcome::Cycle { preperiod, period } if preperiod <= 1 && period <= 2 => Verdict::Confirmed,
        Outcome::Cycle { .. } => Verdict::Refuted,
        // the zero state is a fixed point
        Outcome::Terminated { step } if step <= 1 => Verdict::Confirmed,
        Outcome::Terminated { .. } => Verdict::Refuted,
        _ => Verdict::Unresolved,
    })
}

#[derive(Debug, Clone)]
pub struct LabeledPrediction {
    pub instance_id: String,
    pub prediction: Prediction,
}

#[derive(Debug, Clone)]
pub struct LabeledObservation {
    pub instance_id: String,
    pub mode: IterationMode,
    pub report: OrbitReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservedSummary {
    pub outcome: Outcome,
    pub preperiod: Option<u64>,
    pub period: Option<u64>,
    pub steps: u64,
    pub states_visited: usize,
}

impl From<&OrbitReport> for ObservedSummary {
    fn from(r: &OrbitReport) -> Self {
        ObservedSummary {
            outcome: r.outcome,
            preperiod: r.preperiod(),
            period: r.period(),
            steps: r.steps(),
            states_visited: r.states_visited,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscrepancyRecord {
    pub instance_id: String,
    pub mode: IterationMode,
    pub prediction: Prediction,
    pub observed: ObservedSummary,
    pub verdict: Verdict,
    /// Diagonal-law check, present for diagonal matrices in norm mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_law: Option<Verdict>,
}

pub fn compare_prediction(
    pred: &LabeledPrediction,
    obs: &LabeledObservation,
) -> Result<DiscrepancyRecord, HarnessError> {
    if pred.instance_id != obs.instance_id {
        return Err(HarnessError::InstanceMismatch {
            prediction: pred.instance_id.clone(),
            observation: obs.instance_id.clone(),
        });
    }
    let outcome = &obs.report.outcome;
    let norm_law = match obs.mode {
        IterationMode::Norm => judge_norm_law(pred.prediction.norm_mode, outcome),
        IterationMode::Linear => None,
    };
    Ok(DiscrepancyRecord {
        instance_id: pred.instance_id.clone(),
        mode: obs.mode,
        prediction: pred.prediction.clone(),
        observed: ObservedSummary::from(&obs.report),
        verdict: judge(pred.prediction.claim, outcome),
        norm_law,
    })
}

/// Orbit budgets in a sweep config. Missing fields take the per-prime
/// defaults of [`OrbitLimits::defaults_for`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_stored_states: Option<usize>,
    /// Rational string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_threshold: Option<String>,
}

impl LimitsConfig {
    pub fn resolve(&self, p: Prime) -> Result<OrbitLimits, ParseError> {
        let mut limits = OrbitLimits::defaults_for(p);
        if let Some(m) = self.max_steps {
            limits.max_steps = m;
        }
        if let Some(m) = self.max_stored_states {
            limits.max_stored_states = m;
        }
        if let Some(t) = &self.divergence_threshold {
            limits.divergence_threshold =
                parse_rational(t).map_err(|e| e.at("limits.divergence_threshold"))?;
        }
        limits.validate()?;
        Ok(limits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub profiles: Vec<GeneratorProfile>,
    pub instances_per_profile: usize,
    pub modes: Vec<IterationMode>,
    #[serde(default)]
    pub limits: LimitsConfig,
    pub rng_seed: u64,
    #[serde(default = "default_max_order")]
    pub max_order: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_max_order() -> u64 {
    DEFAULT_MAX_ORDER
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ParseError> {
        for (i, prof) in self.profiles.iter().enumerate() {
            prof.validate()
                .map_err(|e| e.at(format!("profiles[{i}]")))?;
            self.limits.resolve(prof.p)?;
        }
        if self.instances_per_profile == 0 {
            return Err(ParseError::Schema(
                "instances_per_profile must be positive".into(),
            ));
        }
        if self.max_order == 0 {
            return Err(ParseError::Schema("max_order must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(ParseError::Schema("workers must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| ParseError::Schema(format!("invalid sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, LoadError> {
        Ok(Self::from_json(&read(path)?)?)
    }
}

/// One JSON line of a sweep report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRecord {
    pub profile: ProfileKind,
    pub profile_index: usize,
    pub instance_index: usize,
    pub p: Prime,
    pub matrix: Vec<Vec<String>>,
    pub seed: Vec<String>,
    pub class: SpectrumClass,
    #[serde(flatten)]
    pub record: DiscrepancyRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub profile: String,
    pub mode: IterationMode,
    pub confirmed: usize,
    pub refuted: usize,
    pub unresolved: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain data serializes"));
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("profile,mode,confirmed,refuted,unresolved\n");
        for row in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.profile,
                row.mode.as_str(),
                row.confirmed,
                row.refuted,
                row.unresolved
            ));
        }
        out
    }

    /// Writes `records.jsonl` and `summary.csv` into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("records.jsonl"), self.to_jsonl())?;
        fs::write(dir.join("summary.csv"), self.summary_csv())?;
        Ok(())
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.records
            .iter()
            .filter(|r| r.record.verdict == verdict)
            .count()
    }
}

fn evaluate(
    config: &SweepConfig,
    profile_index: usize,
    instance_index: usize,
) -> Result<Vec<SweepRecord>, ParseError> {
    let profile = &config.profiles[profile_index];
    let limits = config.limits.resolve(profile.p)?;
    let mut rng = instance_rng(config.rng_seed, profile_index, instance_index);
    let inst = gen_instance(profile, IterationMode::Linear, &mut rng);
    let spectral = analyze(inst.matrix(), inst.p(), config.max_order);
    let instance_id = format!("{profile_index}:{instance_index}");
    let pred = LabeledPrediction {
        instance_id: instance_id.clone(),
        prediction: spectral.prediction.clone(),
    };
    let records = config
        .modes
        .iter()
        .map(|&mode| {
            let report = run_orbit(&inst.with_mode(mode), &limits);
            let obs = LabeledObservation {
                instance_id: instance_id.clone(),
                mode,
                report,
            };
            let record = compare_prediction(&pred, &obs).expect("ids built from the same job");
            SweepRecord {
                profile: profile.kind,
                profile_index,
                instance_index,
                p: profile.p,
                matrix: matrix_strings(inst.matrix()),
                seed: vector_strings(inst.seed()),
                class: spectral.class,
                record,
            }
        })
        .collect();
    Ok(records)
}

/// Generates every instance, runs every mode, and compares against the
/// spectral prediction.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    config
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let jobs: Vec<(usize, usize)> = (0..config.profiles.len())
        .flat_map(|pi| (0..config.instances_per_profile).map(move |ii| (pi, ii)))
        .collect();
    let work = || -> Result<Vec<Vec<SweepRecord>>, ParseError> {
        jobs.par_iter()
            .map(|&(pi, ii)| evaluate(config, pi, ii))
            .collect()
    };
    let nested = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let records: Vec<SweepRecord> = nested.into_iter().flatten().collect();

    let mut counts: BTreeMap<(usize, usize), [usize; 3]> = BTreeMap::new();
    for r in &records {
        let mode_index = config
            .modes
            .iter()
            .position(|&m| m == r.record.mode)
            .expect("mode from config");
        let slot = match r.record.verdict {
            Verdict::Confirmed => 0,
            Verdict::Refuted => 1,
            Verdict::Unresolved => 2,
        };
        counts.entry((r.profile_index, mode_index)).or_default()[slot] += 1;
    }
    let summary = counts
        .into_iter()
        .map(|((pi, mi), [c, r, u])| SummaryRow {
            profile: config.profiles[pi].label(),
            mode: config.modes[mi],
            confirmed: c,
            refuted: r,
            unresolved: u,
        })
        .collect();
    Ok(SweepReport { records, summary })
}
