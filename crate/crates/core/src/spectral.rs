//! Eigenvalue valuations without eigenvalues.
//!
//! The lower convex hull of `(i, v_p(a_i))` for `f = sum a_i t^i` has one
//! segment per distinct root valuation: a segment of slope `s` and length
//! `l` means exactly `l` roots (in an algebraic closure of `Q_p`) with
//! valuation `-s`. Applied to the characteristic polynomial this yields
//! the valuation multiset of the spectrum while staying inside `Q`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::LinalgError;
use crate::linalg::{char_poly, mat_pow, squarefree_part, Polynomial, RationalMatrix};
use crate::padic::{format_rational, is_p_integer, vp, Prime, Rational, Valuation};

/// Valuation of a root: rational (roots may live in ramified extensions),
/// or `+inf` for a zero root. Finite values order below `Infinite`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootValuation {
    Finite(Rational),
    Infinite,
}

impl RootValuation {
    pub fn from_int(v: i64) -> Self {
        RootValuation::Finite(Rational::from_integer(v.into()))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            RootValuation::Finite(v) => Some(v),
            RootValuation::Infinite => None,
        }
    }
}

impl From<Valuation> for RootValuation {
    fn from(v: Valuation) -> Self {
        match v {
            Valuation::Finite(k) => RootValuation::from_int(k),
            Valuation::Infinite => RootValuation::Infinite,
        }
    }
}

impl fmt::Display for RootValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootValuation::Finite(v) => f.write_str(&format_rational(v)),
            RootValuation::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for RootValuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(with = "crate::padic::serde_rational")]
    pub slope: Rational,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    /// Strictly increasing slopes.
    pub segments: Vec<Segment>,
    /// Multiplicity of the root `0`, i.e. the number of vanishing low-order
    /// coefficients. These roots carry valuation `+inf`.
    pub zero_roots: usize,
}

impl NewtonPolygon {
    /// Root valuations in ascending order, `+inf` last.
    pub fn root_valuations(&self) -> Vec<RootValuation> {
        let mut out: Vec<RootValuation> = self
            .segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(RootValuation::Finite(-s.slope.clone()), s.length))
            .collect();
        out.sort();
        out.extend(std::iter::repeat_n(
            RootValuation::Infinite,
            self.zero_roots,
        ));
        out
    }

    pub fn total_length(&self) -> usize {
        self.zero_roots + self.segments.iter().map(|s| s.length).sum::<usize>()
    }
}

/// Lower convex hull of `(i, v_p(a_i))` over the nonzero coefficients of a
/// monic polynomial.
pub fn newton_polygon(f: &Polynomial, p: Prime) -> Result<NewtonPolygon, LinalgError> {
    if f.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    if !f.is_monic() {
        return Err(LinalgError::NotMonic);
    }
    let points: Vec<(i128, i128)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| vp(c, p).finite().map(|v| (i as i128, v as i128)))
        .collect();
    let zero_roots = points[0].0 as usize;

    // monotone chain; collinear middle points are dropped so that slopes
    // come out strictly increasing
    let mut hull: Vec<(i128, i128)> = Vec::with_capacity(points.len());
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let segments = hull
        .windows(2)
        .map(|w| {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            Segment {
                slope: Rational::new(dy.into(), dx.into()),
                length: dx as usize,
            }
        })
        .collect();
    Ok(NewtonPolygon {
        segments,
        zero_roots,
    })
}

/// Valuations of the eigenvalues of `d`, with multiplicity, ascending.
pub fn eigenvalue_valuations(d: &RationalMatrix, p: Prime) -> Vec<RootValuation> {
    newton_polygon(&char_poly(d), p)
        .expect("characteristic polynomials are monic")
        .root_valuations()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpectrumClass {
    /// Every eigenvalue has valuation > 0 (zero eigenvalues included).
    Contractive,
    /// Every eigenvalue has valuation exactly 0.
    Unitary,
    /// Some eigenvalue has negative valuation.
    Expansive,
    /// All valuations >= 0, some zero and some positive.
    Mixed,
}

impl SpectrumClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumClass::Contractive => "CONTRACTIVE",
            SpectrumClass::Unitary => "UNITARY",
            SpectrumClass::Expansive => "EXPANSIVE",
            SpectrumClass::Mixed => "MIXED",
        }
    }
}

impl fmt::Display for SpectrumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_spectrum(valuations: &[RootValuation]) -> SpectrumClass {
    let zero = RootValuation::Finite(Rational::zero());
    if valuations.iter().any(|v| *v < zero) {
        SpectrumClass::Expansive
    } else if valuations.iter().all(|v| *v > zero) {
        SpectrumClass::Contractive
    } else if valuations.iter().all(|v| *v == zero) {
        SpectrumClass::Unitary
    } else {
        SpectrumClass::Mixed
    }
}

/// True when every eigenvalue norm lies in `{0} u {p^-1, p^-2, ...}`,
/// i.e. every valuation is `+inf` or a positive integer.
pub fn norms_in_negative_powers(valuations: &[RootValuation]) -> bool {
    valuations.iter().all(|v| match v {
        RootValuation::Infinite => true,
        RootValuation::Finite(r) => r.is_integer() && *r >= Rational::one(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct UnityOrder {
    pub order: u64,
    /// `D^order = I` holds, which forces linear orbits to be periodic with
    /// period dividing `order`.
    pub certified: bool,
}

/// Smallest `m <= max_order` such that every eigenvalue is an `m`-th root
/// of unity, i.e. the squarefree part of the characteristic polynomial
/// divides `t^m - 1`.
pub fn roots_of_unity_order(d: &RationalMatrix, max_order: u64) -> Option<UnityOrder> {
    let g = squarefree_part(&char_poly(d)).expect("characteristic polynomials are nonzero");
    // monic factors of t^m - 1 have integer coefficients (Gauss) and unit
    // constant term; bail out before the powers of t blow up
    if !g.coeffs().iter().all(Rational::is_integer) || g.coeff(0).abs() != Rational::one() {
        return None;
    }
    let t = Polynomial::new(vec![Rational::zero(), Rational::one()]);
    // r = t^m mod g; g | t^m - 1 iff r == 1
    let mut r = Polynomial::one().div_rem(&g).ok()?.1;
    for m in 1..=max_order {
        r = (&r * &t).div_rem(&g).ok()?.1;
        if r == Polynomial::one() {
            debug_assert!(g.divides(&Polynomial::x_pow_minus_one(m as usize)).unwrap());
            return Some(UnityOrder {
                order: m,
                certified: mat_pow(d, m).is_identity(),
            });
        }
    }
    None
}

/// The behavior claimed for linear-mode orbits from a nonzero seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Claim {
    /// Componentwise norms tend to zero.
    Terminates,
    /// Never reaches zero; with a certified unity order `m`, periodic from
    /// the start with period dividing `m`.
    NonVanishing {
        period_divides: Option<u64>,
    },
    /// The largest componentwise norm is unbounded.
    UnboundedGrowth,
    Indeterminate,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Terminates => f.write_str("terminates"),
            Claim::NonVanishing {
                period_divides: Some(m),
            } => {
                write!(f, "non-null, periodic, period | {m}")
            }
            Claim::NonVanishing {
                period_divides: None,
            } => f.write_str("non-null"),
            Claim::UnboundedGrowth => f.write_str("norm growth unbounded"),
            Claim::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

/// What can be proved about norm-mode orbits. Only the diagonal case is
/// settled: each component's valuation obeys `v -> -(v(d_ii) + v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormModeClaim {
    /// Preperiod at most 1, period 1 or 2.
    DiagonalPeriodic,
    Unspecified,
}

impl fmt::Display for NormModeClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormModeClaim::DiagonalPeriodic => {
                f.write_str("eventually periodic, preperiod <= 1, period in {1, 2}")
            }
            NormModeClaim::Unspecified => f.write_str("unspecified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub class: SpectrumClass,
    pub claim: Claim,
    /// Which stated result the claim instantiates.
    pub clause: &'static str,
    pub unity: Option<UnityOrder>,
    /// All matrix entries lie in `Z_p`.
    pub matrix_integral: bool,
    pub norm_mode: NormModeClaim,
}

pub mod clause {
    pub const CONTRACTIVE_TERMINATION: &str = "contractive-termination";
    pub const UNIT_NONVANISHING: &str = "unit-nonvanishing";
    pub const UNIT_INTEGRAL_NONTERMINATION: &str = "unit-integral-nontermination";
    pub const UNIT_ROOT_OF_UNITY_PERIODICITY: &str = "unit-root-of-unity-periodicity";
    pub const EXPANSIVE_GROWTH: &str = "expansive-growth";
    pub const NONE: &str = "none";
}

impl Serialize for Prediction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Prediction", 4)?;
        st.serialize_field("claim", &self.claim.to_string())?;
        st.serialize_field("paper_clause", self.clause)?;
        st.serialize_field("matrix_integral", &self.matrix_integral)?;
        st.serialize_field("norm_mode", &self.norm_mode.to_string())?;
        st.end()
    }
}

pub const DEFAULT_MAX_ORDER: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralReport {
    pub polygon: NewtonPolygon,
    pub valuations: Vec<RootValuation>,
    pub class: SpectrumClass,
    pub unity: Option<UnityOrder>,
    pub prediction: Prediction,
}

impl Serialize for SpectralReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SpectralReport", 6)?;
        st.serialize_field("polygon", &self.polygon)?;
        st.serialize_field("valuations", &self.valuations)?;
        st.serialize_field("class", self.class.as_str())?;
        st.serialize_field("unity_order", &self.unity.map(|u| u.order))?;
        st.serialize_field("certified", &self.unity.is_some_and(|u| u.certified))?;
        st.serialize_field("prediction", &self.prediction)?;
        st.end()
    }
}

/// Full spectral analysis of `d` over `Q_p`.
pub fn analyze(d: &RationalMatrix, p: Prime, max_order: u64) -> SpectralReport {
    let polygon = newton_polygon(&char_poly(d), p).expect("characteristic polynomials are monic");
    let valuations = polygon.root_valuations();
    let class = classify_spectrum(&valuations);
    let unity = roots_of_unity_order(d, max_order);
    debug_assert!(unity.is_none() || class == SpectrumClass::Unitary);
    let matrix_integral = d.entries().all(|x| is_p_integer(x, p));

    let (claim, clause) = match class {
        SpectrumClass::Contractive => (Claim::Terminates, clause::CONTRACTIVE_TERMINATION),
        SpectrumClass::Unitary => match unity {
            Some(UnityOrder {
                order,
                certified: true,
            }) => (
                Claim::NonVanishing {
                    period_divides: Some(order),
                },
                clause::UNIT_ROOT_OF_UNITY_PERIODICITY,
            ),
            _ if matrix_integral => (
                Claim::NonVanishing {
                    period_divides: None,
                },
                clause::UNIT_INTEGRAL_NONTERMINATION,
            ),
            _ => (
                Claim::NonVanishing {
                    period_divides: None,
                },
                clause::UNIT_NONVANISHING,
            ),
        },
        SpectrumClass::Expansive => (Claim::UnboundedGrowth, clause::EXPANSIVE_GROWTH),
        SpectrumClass::Mixed => (Claim::Indeterminate, clause::NONE),
    };
    let norm_mode = if d.is_diagonal() {
        NormModeClaim::DiagonalPeriodic
    } else {
        NormModeClaim::Unspecified
    };

    SpectralReport {
        polygon,
        valuations,
        class,
        unity,
        prediction: Prediction {
            class,
            claim,
            clause,
            unity,
            matrix_integral,
            norm_mode,
        },
    }
}

pub fn predict_behavior(d: &RationalMatrix, p: Prime, max_order: u64) -> Prediction {
    analyze(d, p, max_order).prediction
}
