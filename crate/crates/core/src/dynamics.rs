//! Ducci iteration: the classical integer map, the two p-adic semantics, and
//! an orbit runner with exact cycle detection.
//!
//! Two iteration modes exist for the same matrix `D` and prime `p`:
//!
//! * [`IterationMode::Norm`]: `x -> |D x|_p` componentwise. After one step
//!   every entry is `0` or a power of `p`.
//! * [`IterationMode::Linear`]: `x -> D x`, with componentwise norms only
//!   monitored, never applied.
//!
//! They disagree in general. A diagonal `D` with all entries in `pZ_p`
//! drives linear orbits to zero, but in norm mode the valuation of each
//! component follows `v -> -(v(d) + v)`, an involution up to one step, so
//! the orbit settles into a cycle of period 1 or 2 and never terminates.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{DynamicsError, ParseError};
use crate::linalg::{mat_vec_mul, RationalMatrix, RationalVector};
use crate::padic::{padic_abs, vp, Prime, Rational, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterationMode {
    Norm,
    Linear,
}

impl IterationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IterationMode::Norm => "norm",
            IterationMode::Linear => "linear",
        }
    }
}

impl std::str::FromStr for IterationMode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        match s {
            "norm" => Ok(IterationMode::Norm),
            "linear" => Ok(IterationMode::Linear),
            other => Err(ParseError::Schema(format!(
                "mode must be \"norm\" or \"linear\", got {other:?}"
            ))),
        }
    }
}

/// A prime, a square matrix, a seed vector of matching length, and a mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DucciInstance {
    p: Prime,
    matrix: RationalMatrix,
    seed: RationalVector,
    mode: IterationMode,
}

impl DucciInstance {
    pub fn new(
        p: Prime,
        matrix: RationalMatrix,
        seed: RationalVector,
        mode: IterationMode,
    ) -> Result<Self, ParseError> {
        if matrix.dim() != seed.len() {
            return Err(ParseError::Dimension(format!(
                "matrix is {0}x{0} but seed has length {1}",
                matrix.dim(),
                seed.len()
            )));
        }
        Ok(DucciInstance {
            p,
            matrix,
            seed,
            mode,
        })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn seed(&self) -> &RationalVector {
        &self.seed
    }

    pub fn mode(&self) -> IterationMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_mode(&self, mode: IterationMode) -> Self {
        DucciInstance {
            mode,
            ..self.clone()
        }
    }

    /// One step of this instance's mode.
    pub fn step(&self, x: &RationalVector) -> Result<RationalVector, DynamicsError> {
        match self.mode {
            IterationMode::Norm => norm_step(&self.matrix, self.p, x),
            IterationMode::Linear => linear_step(&self.matrix, x),
        }
    }
}

fn checked_mul(d: &RationalMatrix, x: &RationalVector) -> Result<RationalVector, DynamicsError> {
    mat_vec_mul(d, x).map_err(|_| DynamicsError::Dimension {
        matrix: d.dim(),
        state: x.len(),
    })
}

/// `x -> (|(Dx)_1|_p, .., |(Dx)_n|_p)`.
pub fn norm_step(
    d: &RationalMatrix,
    p: Prime,
    x: &RationalVector,
) -> Result<RationalVector, DynamicsError> {
    Ok(checked_mul(d, x)?.iter().map(|y| padic_abs(y, p)).collect())
}

/// `x -> D x`.
pub fn linear_step(
    d: &RationalMatrix,
    x: &RationalVector,
) -> Result<RationalVector, DynamicsError> {
    checked_mul(d, x)
}

/// The classical map `(|x1-x2|, |x2-x3|, |x3-x4|, |x4-x1|)`.
pub fn classical_step(x: &[u64]) -> Result<[u64; 4], DynamicsError> {
    let x: [u64; 4] = x
        .try_into()
        .map_err(|_| DynamicsError::WrongLength(x.len()))?;
    Ok(std::array::from_fn(|i| x[i].abs_diff(x[(i + 1) % 4])))
}

/// Budgets for [`run_orbit`]. Norm thresholds are symmetric: a state whose
/// largest componentwise norm exceeds `divergence_threshold` ends the run as
/// diverged, and a nonzero state whose largest norm is below its reciprocal
/// ends it as vanished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitLimits {
    pub max_steps: u64,
    pub max_stored_states: usize,
    pub divergence_threshold: Rational,
}

impl OrbitLimits {
    pub const DEFAULT_MAX_STEPS: u64 = 10_000;
    pub const DEFAULT_MAX_STORED_STATES: usize = 1_000_000;
    pub const DEFAULT_THRESHOLD_EXPONENT: i64 = 50;

    /// `max_steps = 10^4`, `max_stored_states = 10^6`, threshold `p^50`.
    pub fn defaults_for(p: Prime) -> Self {
        OrbitLimits {
            max_steps: Self::DEFAULT_MAX_STEPS,
            max_stored_states: Self::DEFAULT_MAX_STORED_STATES,
            divergence_threshold: p.pow(Self::DEFAULT_THRESHOLD_EXPONENT),
        }
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        if self.max_steps == 0 {
            return Err(ParseError::Schema("max_steps must be positive".into()));
        }
        if self.max_stored_states == 0 {
            return Err(ParseError::Schema(
                "max_stored_states must be positive".into(),
            ));
        }
        if self.divergence_threshold <= Rational::zero() {
            return Err(ParseError::Schema(
                "divergence_threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// How an orbit run ended. Step indices count states, the seed being step 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The state at `step` is the zero vector.
    Terminated { step: u64 },
    /// `state(preperiod) == state(preperiod + period)`, `period` minimal.
    Cycle { preperiod: u64, period: u64 },
    /// Largest componentwise norm exceeded the divergence threshold.
    NormDiverged { step: u64 },
    /// Largest componentwise norm fell below the reciprocal threshold.
    NormVanished { step: u64 },
    /// Step or storage budget ran out.
    Unresolved { steps_run: u64 },
}

impl Outcome {
    /// Index of the last state examined.
    pub fn last_step(&self) -> u64 {
        match *self {
            Outcome::Terminated { step }
            | Outcome::NormDiverged { step }
            | Outcome::NormVanished { step } => step,
            Outcome::Cycle { preperiod, period } => preperiod + period,
            Outcome::Unresolved { steps_run } => steps_run,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub outcome: Outcome,
    /// `(min, max)` componentwise valuation of every examined state.
    pub valuation_trace: Vec<(Valuation, Valuation)>,
    pub states_visited: usize,
}

impl OrbitReport {
    pub fn steps(&self) -> u64 {
        self.outcome.last_step()
    }

    pub fn preperiod(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Cycle { preperiod, .. } => Some(preperiod),
            _ => None,
        }
    }

    pub fn period(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Cycle { period, .. } => Some(period),
            _ => None,
        }
    }
}

/// `(min, max)` of the componentwise valuations; `(inf, inf)` for zero.
pub fn valuation_range(x: &RationalVector, p: Prime) -> (Valuation, Valuation) {
    let vals = x.iter().map(|c| vp(c, p));
    let min = vals.clone().min().unwrap_or(Valuation::Infinite);
    let max = vals.max().unwrap_or(Valuation::Infinite);
    (min, max)
}

/// Largest componentwise `|x_i|_p`.
pub fn max_norm(x: &RationalVector, p: Prime) -> Rational {
    match valuation_range(x, p).0 {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => p.pow(-v),
    }
}

/// What the per-state hook tells the engine.
enum Verdict {
    Continue,
    Stop(Outcome),
}

/// Exact orbit engine shared by the p-adic and classical runners.
///
/// Each state is checked in order: zero, repetition (first-seen table, so
/// the first repeat yields the minimal period), the caller's hook, then the
/// budgets. Only then is the next state computed.
fn drive<S, E>(
    seed: S,
    max_steps: u64,
    max_stored: usize,
    is_zero: impl Fn(&S) -> bool,
    mut step: impl FnMut(&S) -> Result<S, E>,
    mut hook: impl FnMut(u64, &S) -> Verdict,
) -> Result<(Outcome, usize), E>
where
    S: Eq + Hash + Clone,
{
    let mut seen: HashMap<S, u64> = HashMap::new();
    let mut state = seed;
    let mut k = 0u64;
    loop {
        if is_zero(&state) {
            hook(k, &state);
            return Ok((Outcome::Terminated { step: k }, seen.len() + 1));
        }
        if let Some(&first) = seen.get(&state) {
            return Ok((
                Outcome::Cycle {
                    preperiod: first,
                    period: k - first,
                },
                seen.len(),
            ));
        }
        if let Verdict::Stop(outcome) = hook(k, &state) {
            return Ok((outcome, seen.len() + 1));
        }
        if k >= max_steps || seen.len() >= max_stored {
            return Ok((Outcome::Unresolved { steps_run: k }, seen.len() + 1));
        }
        let next = step(&state)?;
        seen.insert(state, k);
        state = next;
        k += 1;
    }
}

/// Iterates the instance's step map from its seed until the first of:
/// zero state, exact repetition, threshold crossing, or budget exhaustion.
pub fn run_orbit(inst: &DucciInstance, limits: &OrbitLimits) -> OrbitReport {
    let p = inst.p;
    let upper = &limits.divergence_threshold;
    let lower = Rational::one() / upper;
    let mut trace = Vec::new();
    let hook = |k: u64, x: &RationalVector| {
        let range = valuation_range(x, p);
        trace.push(range);
        let Valuation::Finite(min_v) = range.0 else {
            return Verdict::Continue;
        };
        let norm = p.pow(-min_v);
        if &norm > upper {
            Verdict::Stop(Outcome::NormDiverged { step: k })
        } else if norm < lower {
            Verdict::Stop(Outcome::NormVanished { step: k })
        } else {
            Verdict::Continue
        }
    };
    let (outcome, states_visited) = drive(
        inst.seed.clone(),
        limits.max_steps,
        limits.max_stored_states,
        RationalVector::is_zero,
        |x| inst.step(x),
        hook,
    )
    .expect("instance dimensions are validated at construction");
    OrbitReport {
        outcome,
        valuation_trace: trace,
        states_visited,
    }
}

/// Result of iterating the classical map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalOrbit {
    pub outcome: Outcome,
    /// Every examined state, seed first.
    pub states: Vec<[u64; 4]>,
}

pub fn run_classical(seed: [u64; 4], max_steps: u64) -> ClassicalOrbit {
    let mut states = Vec::new();
    let (outcome, _) = drive(
        seed,
        max_steps,
        usize::MAX,
        |x| x.iter().all(|&c| c == 0),
        |x| classical_step(x),
        |_, x| {
            states.push(*x);
            Verdict::Continue
        },
    )
    .expect("fixed length");
    ClassicalOrbit { outcome, states }
}
