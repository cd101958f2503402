//! Exact p-adic Ducci dynamics over the rationals.
//!
//! * [`padic`]: valuations and absolute values on `Q`.
//! * [`linalg`]: exact vectors, matrices, characteristic polynomials.
//! * [`dynamics`]: the classical map, norm-mode and linear-mode iteration,
//!   orbit running with exact cycle detection.
//! * [`spectral`]: eigenvalue valuations via Newton polygons and behavior
//!   predictions.
//! * [`harness`]: seeded instance generation and prediction-vs-observation
//!   sweeps.
//! * [`schema`]: JSON instance and report file formats.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod padic;
pub mod schema;
pub mod spectral;

pub use dynamics::{
    classical_step, linear_step, norm_step, run_classical, run_orbit, DucciInstance, IterationMode,
    OrbitLimits, OrbitReport, Outcome,
};
pub use error::{DynamicsError, HarnessError, LinalgError, LoadError, ParseError};
pub use harness::{
    compare_prediction, gen_instance, run_sweep, GeneratorProfile, ProfileKind, SweepConfig,
    SweepReport, Verdict,
};
pub use linalg::{
    char_poly, mat_pow, mat_vec_mul, squarefree_part, Polynomial, RationalMatrix, RationalVector,
};
pub use padic::{
    format_rational, is_p_integer, padic_abs, parse_rational, vp, Prime, Rational, Valuation,
};
pub use spectral::{
    analyze, classify_spectrum, eigenvalue_valuations, newton_polygon, predict_behavior,
    roots_of_unity_order, Claim, Prediction, SpectralReport, SpectrumClass,
};
