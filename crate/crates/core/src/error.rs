use thiserror::Error;

/// Input validation failures: bad scalars, bad primes, bad shapes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed rational {0:?}")]
    Rational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("p must be prime (got {0})")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{field}: {source}")]
    Field {
        field: String,
        #[source]
        source: Box<ParseError>,
    },
    #[error("{0}")]
    Schema(String),
}

impl ParseError {
    /// Attaches the name of the offending field.
    pub fn at(self, field: impl Into<String>) -> ParseError {
        ParseError::Field {
            field: field.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with field context stripped.
    pub fn root(&self) -> &ParseError {
        match self {
            ParseError::Field { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not monic")]
    NotMonic,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("instance id mismatch: prediction for {prediction}, observation for {observation}")]
    InstanceMismatch {
        prediction: String,
        observation: String,
    },
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("dimension mismatch: matrix is {matrix}x{matrix} but state has length {state}")]
    Dimension { matrix: usize, state: usize },
    #[error("classical map takes exactly 4 entries, got {0}")]
    WrongLength(usize),
}

/// Failure to load a JSON input file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Invalid(#[from] ParseError),
}
