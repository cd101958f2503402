//! p-adic valuation and absolute value on exact rationals.
//!
//! Every scalar in the crate is a [`Rational`], i.e. an element of the dense
//! subfield `Q` of `Q_p`. Valuations are exact, and the absolute value
//! `|x|_p = p^(-v_p(x))` is returned as an exact rational, never a float.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// Exact rational scalar. `Ratio` keeps itself reduced with a positive
/// denominator, so equality and hashing are structural.
pub type Rational = num_rational::BigRational;

/// A prime number, validated by trial division at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, ParseError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(ParseError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^k` for any integer `k`, as an exact rational.
    pub fn pow(self, k: i64) -> Rational {
        let mag = num_traits::pow(self.as_bigint(), k.unsigned_abs() as usize);
        if k >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational::new_raw(BigInt::one(), mag)
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        Prime::new(p).map_err(serde::de::Error::custom)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The value of `v_p`: an integer, or `+inf` for zero.
///
/// The derived ordering puts every finite value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

// JSON form: an integer, or the string "inf".
impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(Valuation::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Valuation::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Exponent of `p` in a nonzero integer.
fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    if p == 2 {
        return n.trailing_zeros().expect("nonzero") as i64;
    }
    // strip the largest power of p that fits in a u64 at a time
    let (mut chunk, mut e) = (p, 1i64);
    while let Some(c) = chunk.checked_mul(p) {
        chunk = c;
        e += 1;
    }
    let mut m = n.magnitude().clone();
    let mut k = 0;
    while (&m % chunk).is_zero() {
        m /= chunk;
        k += e;
    }
    while (&m % p).is_zero() {
        m /= p;
        k += 1;
    }
    k
}

/// `v_p(x)`: the `k` with `x = p^k * a/b`, `p` dividing neither `a` nor `b`.
pub fn vp(x: &Rational, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    // reduced form: p divides at most one of numer/denom
    Valuation::Finite(int_valuation(x.numer(), p.get()) - int_valuation(x.denom(), p.get()))
}

/// `|x|_p = p^(-v_p(x))`, with `|0|_p = 0`.
pub fn padic_abs(x: &Rational, p: Prime) -> Rational {
    match vp(x, p) {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => p.pow(-v),
    }
}

/// Membership in `Z_p`: `v_p(x) >= 0`.
pub fn is_p_integer(x: &Rational, p: Prime) -> bool {
    vp(x, p) >= Valuation::Finite(0)
}

/// Parses `"a"` or `"a/b"` into a reduced rational. Rejects `b = 0`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let bad = || ParseError::Rational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (t, None),
    };
    let num = parse_int(num).ok_or_else(bad)?;
    let den = match den {
        Some(b) => parse_int(b).ok_or_else(bad)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(ParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s
        .strip_prefix('-')
        .or_else(|| s.strip_prefix('+'))
        .unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Canonical string form, `"a"` for integers and `"a/b"` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapters that read and write rationals as strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
