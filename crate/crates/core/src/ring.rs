//! Coefficient rings.
//!
//! Series and polynomials in this crate are generic over a [`Ring`]. Three
//! rings are provided: exact rationals ([`Rational`]), `f64`, and
//! [`BivariatePoly`](crate::bivariate::BivariatePoly) over either of those.
//! Exact rationals never round; the expansion solver defaults to them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::SeriesError;

/// Exact rational coefficients.
pub type Rational = BigRational;

/// Which concrete ring a coefficient type is. Used for JSON tagging and
/// error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingKind {
    Rational,
    Float,
    Bivariate,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingKind::Rational => f.write_str("rational"),
            RingKind::Float => f.write_str("f64"),
            RingKind::Bivariate => f.write_str("bivariate"),
        }
    }
}

/// A commutative ring with the handful of extras the series code needs.
///
/// All operations are total and deterministic.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const KIND: RingKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn from_i64(v: i64) -> Self;

    /// `num / den`. Rings without division (polynomials) only need to
    /// support this for constants, which is all callers ever ask for.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    /// `log 2`, when the ring can represent it.
    fn ln2() -> Option<Self> {
        None
    }

    /// Nearest `f64`, when the element is a plain number.
    fn to_f64(&self) -> Option<f64>;

    fn scale_i64(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k))
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|r| self.mul(&r))
    }
}

impl Ring for Rational {
    const KIND: RingKind = RingKind::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(rational_to_f64(self))
    }
}

impl Field for Rational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Ring for f64 {
    const KIND: RingKind = RingKind::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn ln2() -> Option<Self> {
        Some(std::f64::consts::LN_2)
    }
    fn to_f64(&self) -> Option<f64> {
        Some(*self)
    }
}

impl Field for f64 {
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

/// Converts a big rational to the nearest-ish `f64`, staying finite for
/// numerators and denominators far outside the `f64` range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs(q).exp()
}

/// `ln |q|`, computed without overflowing for huge numerators/denominators.
/// Returns `-inf` for zero.
pub fn ln_abs(q: &Rational) -> f64 {
    if Zero::is_zero(q) {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(q.numer()) - ln_abs_int(q.denom())
}

fn ln_abs_int(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = v.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Parses an exact rational from `p/q`, an integer, or a finite decimal
/// such as `-1.25` or `3e-2`.
pub fn parse_rational(s: &str) -> Result<Rational, SeriesError> {
    let s = s.trim();
    let bad = || SeriesError::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if s.contains('/') {
        let (p, q) = s.split_once('/').ok_or_else(bad)?;
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if matches!(digits.as_str(), "" | "-" | "+") {
        return Err(bad());
    }
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Renders a rational as `p/q` (or `p` for integers).
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}
