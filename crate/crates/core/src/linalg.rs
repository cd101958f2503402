//! Exact rational vectors, square matrices and polynomials.
//!
//! Nothing here approximates: characteristic polynomials come from the
//! Faddeev-LeVerrier recursion (which only ever divides by `1..=n`) and
//! polynomial gcds from the monic Euclidean algorithm over `Q`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::LinalgError;
use crate::padic::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalVector(Vec<Rational>);

// Rationals are kept reduced, so numerator and denominator identify the
// value; the library's own hash runs a continued-fraction expansion.
impl Hash for RationalVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.len().hash(state);
        for x in &self.0 {
            x.numer().hash(state);
            x.denom().hash(state);
        }
    }
}

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![Rational::zero(); n])
    }

    pub fn from_i64s(xs: &[i64]) -> Self {
        RationalVector(
            xs.iter()
                .map(|&x| Rational::from_integer(x.into()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

impl std::ops::Index<usize> for RationalVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RationalVector(iter.into_iter().collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A square `n x n` rational matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    /// Builds a matrix from rows; fails unless the rows form a nonempty square.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::Dimension(
                "matrix must have at least one row".into(),
            ));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LinalgError::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Ok(RationalMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        RationalMatrix { n, data }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, LinalgError> {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rational::from_integer(x.into()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_, _| Rational::zero())
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// The cyclic shift `(x_1, .., x_n) -> (x_2, .., x_n, x_1)`.
    pub fn cyclic_shift(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if j == (i + 1) % n {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    /// The classical four-number Ducci difference matrix `x_i - x_{i+1}`.
    pub fn classical_ducci(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                Rational::one()
            } else if j == (i + 1) % n {
                -Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.data.chunks(self.n)
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul_mat(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, LinalgError> {
        if self.n != rhs.n {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.n, rhs.n
            )));
        }
        let n = self.n;
        Ok(Self::from_fn(n, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..n {
                let a = self.get(i, k);
                if !a.is_zero() {
                    acc += a * rhs.get(k, j);
                }
            }
            acc
        }))
    }

    pub fn add_mat(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, LinalgError> {
        if self.n != rhs.n {
            return Err(LinalgError::Dimension(format!(
                "cannot add {0}x{0} and {1}x{1}",
                self.n, rhs.n
            )));
        }
        Ok(RationalMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Determinant by fraction-based Gaussian elimination.
    pub fn det(&self) -> Rational {
        let n = self.n;
        let mut m: Vec<Vec<Rational>> = self.to_rows();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let pv = m[col][col].clone();
            det *= &pv;
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &pv;
                let (upper, lower) = m.split_at_mut(r);
                for (target, source) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *target -= &factor * source;
                }
            }
        }
        det
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let parts: Vec<String> = r.iter().map(format_rational).collect();
            write!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Exact product `A x`; entry `i` is `sum_j a_ij x_j`.
pub fn mat_vec_mul(a: &RationalMatrix, x: &RationalVector) -> Result<RationalVector, LinalgError> {
    if a.dim() != x.len() {
        return Err(LinalgError::Dimension(format!(
            "matrix is {0}x{0} but vector has length {1}",
            a.dim(),
            x.len()
        )));
    }
    // put x over one denominator so each row is an integer dot product
    // followed by a single reduction
    let (xs, x_den) = common_denominator(x.iter());
    Ok(a.rows()
        .map(|row| {
            let (ds, row_den) = common_denominator(row.iter());
            let mut acc = BigInt::zero();
            for (d, xj) in ds.iter().zip(&xs) {
                if !d.is_zero() && !xj.is_zero() {
                    acc += d * xj;
                }
            }
            Rational::new(acc, &row_den * &x_den)
        })
        .collect())
}

/// Integer numerators over the lcm of the denominators.
fn common_denominator<'a>(xs: impl Iterator<Item = &'a Rational> + Clone) -> (Vec<BigInt>, BigInt) {
    let den = xs.clone().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let nums = xs.map(|x| x.numer() * (&den / x.denom())).collect();
    (nums, den)
}

/// `A^m` by repeated squaring, with `A^0 = I`.
pub fn mat_pow(a: &RationalMatrix, mut m: u64) -> RationalMatrix {
    let mut result = RationalMatrix::identity(a.dim());
    let mut base = a.clone();
    while m > 0 {
        if m & 1 == 1 {
            result = result.mul_mat(&base).expect("same dimension");
        }
        m >>= 1;
        if m > 0 {
            base = base.mul_mat(&base).expect("same dimension");
        }
    }
    result
}

/// A polynomial over `Q`, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| Rational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial {
            coeffs: vec![Rational::one()],
        }
    }

    /// `t^m - 1`.
    pub fn x_pow_minus_one(m: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); m + 1];
        coeffs[0] = -Rational::one();
        coeffs[m] += Rational::one();
        Self::new(coeffs)
    }

    /// `t - r`.
    pub fn linear(r: Rational) -> Self {
        Self::new(vec![-r, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn monic(&self) -> Result<Polynomial, LinalgError> {
        let lead = self.leading().ok_or(LinalgError::ZeroPolynomial)?.clone();
        Ok(Polynomial {
            coeffs: self.coeffs.iter().map(|c| c / &lead).collect(),
        })
    }

    pub fn derivative(&self) -> Polynomial {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, a: &RationalMatrix) -> RationalMatrix {
        let n = a.dim();
        let mut acc = RationalMatrix::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_mat(a).expect("same dimension");
            acc = acc
                .add_mat(&RationalMatrix::identity(n).scale(c))
                .expect("same dimension");
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial), LinalgError> {
        let dd = divisor.degree().ok_or(LinalgError::ZeroPolynomial)?;
        let lead = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                let delta = &c * d;
                rem[k + i] -= delta;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    pub fn divides(&self, f: &Polynomial) -> Result<bool, LinalgError> {
        Ok(f.div_rem(self)?.1.is_zero())
    }
}

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.div_rem(&b).expect("b nonzero").1;
        a = b;
        b = r;
    }
    a.monic().unwrap_or_else(|_| Polynomial::zero())
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Rational::zero();
            let mag = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{}", format_rational(&mag))?;
            }
            match i {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Monic `det(tI - A)` via the Faddeev-LeVerrier recursion.
///
/// With `M_0 = 0`, `c_n = 1`:
/// `M_k = A M_{k-1} + c_{n-k+1} I` and `c_{n-k} = -tr(A M_k) / k`.
pub fn char_poly(a: &RationalMatrix) -> Polynomial {
    let n = a.dim();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let identity = RationalMatrix::identity(n);
    let mut m = RationalMatrix::zero(n);
    for k in 1..=n {
        m = a
            .mul_mat(&m)
            .and_then(|am| am.add_mat(&identity.scale(&coeffs[n - k + 1])))
            .expect("same dimension");
        let am = a.mul_mat(&m).expect("same dimension");
        coeffs[n - k] = -am.trace() / Rational::from_integer(k.into());
    }
    Polynomial::new(coeffs)
}

/// `f / gcd(f, f')`, monic: same roots as `f`, each simple.
pub fn squarefree_part(f: &Polynomial) -> Result<Polynomial, LinalgError> {
    if f.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    let g = poly_gcd(f, &f.derivative());
    if g.is_zero() {
        // f is a nonzero constant
        return f.monic();
    }
    let (q, r) = f.div_rem(&g)?;
    debug_assert!(r.is_zero());
    q.monic()
}
