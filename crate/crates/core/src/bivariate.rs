//! Exact polynomials in two variables `(d, t)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::ring::{Ring, RingKind};

/// A polynomial `Σ c_{p,q} d^p t^q` stored sparsely, with no zero entries.
#[derive(Clone, PartialEq, Debug)]
pub struct BivariatePoly<R: Ring> {
    coeffs: BTreeMap<(u32, u32), R>,
}

impl<R: Ring> Default for BivariatePoly<R> {
    fn default() -> Self {
        Self::zero_poly()
    }
}

impl<R: Ring> BivariatePoly<R> {
    pub fn zero_poly() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c · d^p t^q`.
    pub fn monomial(p: u32, q: u32, c: R) -> Self {
        let mut out = Self::zero_poly();
        out.add_term(p, q, c);
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), R)>) -> Self {
        let mut out = Self::zero_poly();
        for ((p, q), c) in terms {
            out.add_term(p, q, c);
        }
        out
    }

    /// Adds `c · d^p t^q`, keeping canonical form.
    pub fn add_term(&mut self, p: u32, q: u32, c: R) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry((p, q)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn coeff(&self, p: u32, q: u32) -> Option<&R> {
        self.coeffs.get(&(p, q))
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &R)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero_poly(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest `p + q` among stored terms; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|(p, q)| p + q).max()
    }

    /// Lowest power of `d` among stored terms; `None` for zero.
    pub fn d_valuation(&self) -> Option<u32> {
        self.coeffs.keys().map(|(p, _)| *p).min()
    }

    /// True when `d^power` divides the polynomial (zero is divisible by anything).
    pub fn divisible_by_d(&self, power: u32) -> bool {
        self.d_valuation().is_none_or(|v| v >= power)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((p, q), c) in other.terms() {
            out.add_term(p, q, c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.neg())).collect(),
        }
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero_poly();
        for ((p1, q1), a) in self.terms() {
            for ((p2, q2), b) in other.terms() {
                out.add_term(p1 + p2, q1 + q2, a.mul(b));
            }
        }
        out
    }

    pub fn scale(&self, c: &R) -> Self {
        Self::from_terms(self.terms().map(|(k, v)| (k, v.mul(c))))
    }

    /// Multiplies by `d^p t^q`.
    pub fn shift(&self, p: u32, q: u32) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|((a, b), c)| ((a + p, b + q), c.clone()))
                .collect(),
        }
    }

    /// ∂/∂d.
    pub fn ddd(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|((p, _), _)| *p > 0)
                .map(|((p, q), c)| ((p - 1, q), c.scale_i64(p as i64))),
        )
    }

    /// ∂/∂t.
    pub fn ddt(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|((_, q), _)| *q > 0)
                .map(|((p, q), c)| ((p, q - 1), c.scale_i64(q as i64))),
        )
    }

    /// Exact division by `d^power`; `None` when some term has a lower power of `d`.
    pub fn div_d(&self, power: u32) -> Option<Self> {
        if !self.divisible_by_d(power) {
            return None;
        }
        Some(Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|((p, q), c)| ((p - power, *q), c.clone()))
                .collect(),
        })
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> BivariatePoly<S> {
        BivariatePoly::from_terms(self.terms().map(|(k, c)| (k, f(c))))
    }

    /// Evaluates at a numeric point when the coefficients are numeric.
    pub fn eval_f64(&self, d: f64, t: f64) -> Option<f64> {
        let mut acc = 0.0;
        for ((p, q), c) in self.terms() {
            acc += c.to_f64()? * d.powi(p as i32) * t.powi(q as i32);
        }
        Some(acc)
    }
}

impl<R: Ring> Ring for BivariatePoly<R> {
    const KIND: RingKind = RingKind::Bivariate;

    fn zero() -> Self {
        Self::zero_poly()
    }
    fn one() -> Self {
        Self::constant(R::one())
    }
    fn is_zero(&self) -> bool {
        self.is_zero_poly()
    }
    fn add(&self, other: &Self) -> Self {
        self.plus(other)
    }
    fn sub(&self, other: &Self) -> Self {
        self.minus(other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.times(other)
    }
    fn neg(&self) -> Self {
        self.negated()
    }
    fn from_i64(v: i64) -> Self {
        Self::constant(R::from_i64(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(R::from_ratio(num, den))
    }
    fn from_rational(q: &crate::ring::Rational) -> Self {
        Self::constant(R::from_rational(q))
    }
    fn ln2() -> Option<Self> {
        R::ln2().map(Self::constant)
    }
    fn to_f64(&self) -> Option<f64> {
        match self.coeffs.len() {
            0 => Some(0.0),
            1 => self.coeff(0, 0).and_then(Ring::to_f64),
            _ => None,
        }
    }
}

impl<R: Ring + fmt::Display> fmt::Display for BivariatePoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (idx, ((p, q), c)) in self.terms().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            match p {
                0 => {}
                1 => f.write_str("·d")?,
                _ => write!(f, "·d^{p}")?,
            }
            match q {
                0 => {}
                1 => f.write_str("·t")?,
                _ => write!(f, "·t^{q}")?,
            }
        }
        Ok(())
    }
}
