//! Truncated log-power series `Σ c_{i,j} x^i (log x)^j`.
//!
//! A [`PolyhomSeries`] stores its coefficients sparsely in canonical form (no
//! zero entries) together with an explicit truncation order `K`: terms with
//! `i > K` are not represented and carry no meaning. Binary operations take
//! the smaller of the two truncation orders.
//!
//! Terms with `i = 0` and `j ≥ 1` are rejected at construction; they are
//! unbounded at `x = 0`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bivariate::BivariatePoly;
use crate::error::SeriesError;
use crate::ring::{format_rational, parse_rational, Ring, Rational};

/// Name of the expansion variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    D,
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::D => "d",
            Var::T => "t",
        })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct PolyhomSeries<R: Ring> {
    var: Var,
    trunc: u32,
    terms: BTreeMap<(u32, u32), R>,
}

impl<R: Ring> PolyhomSeries<R> {
    pub fn zero(var: Var, trunc: u32) -> Self {
        Self {
            var,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    /// `c · x^i (log x)^j`, or the zero series when `i > trunc`.
    pub fn monomial(var: Var, trunc: u32, i: u32, j: u32, c: R) -> Result<Self, SeriesError> {
        Self::from_terms(var, trunc, [((i, j), c)])
    }

    /// Constant series `c`.
    pub fn constant(var: Var, trunc: u32, c: R) -> Self {
        let mut s = Self::zero(var, trunc);
        s.push(0, 0, c);
        s
    }

    /// Builds a series, summing repeated keys and dropping terms above `trunc`.
    pub fn from_terms(
        var: Var,
        trunc: u32,
        terms: impl IntoIterator<Item = ((u32, u32), R)>,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(var, trunc);
        for ((i, j), c) in terms {
            s.add_term(i, j, c)?;
        }
        Ok(s)
    }

    /// Adds `c · x^i (log x)^j` in place.
    pub fn add_term(&mut self, i: u32, j: u32, c: R) -> Result<(), SeriesError> {
        if i == 0 && j > 0 && !c.is_zero() {
            return Err(SeriesError::BannedTerm { i, j });
        }
        self.push(i, j, c);
        Ok(())
    }

    // Caller guarantees (i, j) is representable.
    fn push(&mut self, i: u32, j: u32, c: R) {
        if i > self.trunc || c.is_zero() {
            return;
        }
        match self.terms.entry((i, j)) {
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

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeff(&self, i: u32, j: u32) -> Option<&R> {
        self.terms.get(&(i, j))
    }

    /// Coefficient at `(i, j)`, zero when absent.
    pub fn coeff_or_zero(&self, i: u32, j: u32) -> R {
        self.coeff(i, j).cloned().unwrap_or_else(R::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &R)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Terms at power `i`, in increasing log-degree.
    pub fn terms_at(&self, i: u32) -> impl Iterator<Item = (u32, &R)> {
        self.terms.range((i, 0)..=(i, u32::MAX)).map(|((_, j), c)| (*j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `N_i`: the highest stored log-degree at each power that has terms.
    pub fn log_degrees(&self) -> BTreeMap<u32, u32> {
        let mut out = BTreeMap::new();
        for (i, j) in self.terms.keys() {
            let e = out.entry(*i).or_insert(0);
            *e = (*e).max(*j);
        }
        out
    }

    /// Smallest power with a nonzero coefficient, or `trunc + 1` for the
    /// zero series (it vanishes through the truncation order).
    pub fn residual_order(&self) -> u32 {
        self.terms
            .keys()
            .next()
            .map(|(i, _)| *i)
            .unwrap_or(self.trunc + 1)
    }

    /// Re-truncates at `min(trunc, k)`.
    pub fn truncate(&self, k: u32) -> Self {
        let trunc = self.trunc.min(k);
        Self {
            var: self.var,
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|((i, _), _)| *i <= trunc)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Same terms under a different variable tag.
    pub fn retag(&self, var: Var) -> Self {
        Self {
            var,
            ..self.clone()
        }
    }

    fn check_var(&self, other: &Self) -> Result<(), SeriesError> {
        if self.var != other.var {
            return Err(SeriesError::VariableMismatch {
                left: self.var,
                right: other.var,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_var(other)?;
        let mut out = self.truncate(other.trunc);
        for ((i, j), c) in other.terms() {
            out.push(i, j, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            var: self.var,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (*k, v.neg())).collect(),
        }
    }

    /// Product, truncated at `min(trunc_a, trunc_b)`. Powers and log-degrees add.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_var(other)?;
        let mut out = Self::zero(self.var, self.trunc.min(other.trunc));
        for ((i1, j1), a) in self.terms() {
            if i1 > out.trunc {
                break;
            }
            for ((i2, j2), b) in other.terms() {
                if i1 + i2 > out.trunc {
                    break;
                }
                out.push(i1 + i2, j1 + j2, a.mul(b));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut out = Self::zero(self.var, self.trunc);
        for ((i, j), v) in self.terms() {
            out.push(i, j, v.mul(c));
        }
        out
    }

    /// Adds the constant `c`.
    pub fn add_scalar(&self, c: &R) -> Self {
        let mut out = self.clone();
        out.push(0, 0, c.clone());
        out
    }

    /// Multiplies by `x^p`; the truncation order rises by `p`.
    pub fn shift(&self, p: u32) -> Self {
        Self {
            var: self.var,
            trunc: self.trunc + p,
            terms: self
                .terms
                .iter()
                .map(|((i, j), c)| ((i + p, *j), c.clone()))
                .collect(),
        }
    }

    /// `d/dx`. The truncation order drops by one.
    ///
    /// `c x^i (log x)^j ↦ c i x^{i−1} (log x)^j + c j x^{i−1} (log x)^{j−1}`.
    pub fn ddx(&self) -> Result<Self, SeriesError> {
        if self.trunc == 0 {
            return Err(SeriesError::TruncationExhausted);
        }
        if let Some(((i, j), _)) = self.terms().find(|((i, j), _)| *i <= 1 && *j >= 1) {
            return Err(SeriesError::NonDifferentiable { i, j });
        }
        let mut out = Self::zero(self.var, self.trunc - 1);
        for ((i, j), c) in self.terms() {
            if i == 0 {
                continue;
            }
            out.push(i - 1, j, c.scale_i64(i as i64));
            if j > 0 {
                out.push(i - 1, j - 1, c.scale_i64(j as i64));
            }
        }
        Ok(out)
    }

    /// Euler operator `θ = x d/dx`; always representable, truncation unchanged.
    ///
    /// `θ[x^i (log x)^j] = i x^i (log x)^j + j x^i (log x)^{j−1}`.
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.var, self.trunc);
        for ((i, j), c) in self.terms() {
            out.push(i, j, c.scale_i64(i as i64));
            if j > 0 {
                out.push(i, j - 1, c.scale_i64(j as i64));
            }
        }
        out
    }

    /// Rewrites a `d`-series in `t` with `d = t²/2`, `log d = 2 log t − log 2`.
    /// The truncation order doubles.
    pub fn substitute_d_to_t(&self) -> Result<Self, SeriesError> {
        if self.var != Var::D {
            return Err(SeriesError::VariableMismatch {
                left: self.var,
                right: Var::D,
            });
        }
        let needs_ln2 = self.terms.keys().any(|(_, j)| *j > 0);
        let minus_ln2 = if needs_ln2 {
            R::ln2()
                .ok_or(SeriesError::RingCapability {
                    ring: R::KIND,
                    what: "log 2",
                })?
                .neg()
        } else {
            R::zero()
        };
        let half = R::from_ratio(1, 2);
        let mut out = Self::zero(Var::T, self.trunc * 2);
        for ((i, j), c) in self.terms() {
            let mut base = c.clone();
            for _ in 0..i {
                base = base.mul(&half);
            }
            for l in 0..=j {
                let mut term = base.scale_i64(binomial(j, l));
                for _ in 0..l {
                    term = term.scale_i64(2);
                }
                for _ in 0..(j - l) {
                    term = term.mul(&minus_ln2);
                }
                out.push(2 * i, l, term);
            }
        }
        Ok(out)
    }

    /// `Σ_m f_m a^m` for the Taylor coefficients `f` of an analytic function,
    /// truncated at `a`'s order. Requires `a` to have zero constant term.
    pub fn compose_analytic(f: &[R], a: &Self) -> Result<Self, SeriesError> {
        if a.coeff(0, 0).is_some() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let top = f.len().min(a.trunc as usize + 1);
        let mut acc = Self::zero(a.var, a.trunc);
        for m in (0..top).rev() {
            acc = acc.mul(a)?.add_scalar(&f[m]);
        }
        Ok(acc)
    }

    /// Converts coefficients into another ring.
    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> PolyhomSeries<S> {
        let mut out = PolyhomSeries::zero(self.var, self.trunc);
        for ((i, j), c) in self.terms() {
            out.push(i, j, f(c));
        }
        out
    }

    /// Evaluates `Σ c x^i (log x)^j` at `x > 0` for numeric coefficients.
    pub fn eval_f64(&self, x: f64) -> Option<f64> {
        let lx = x.ln();
        let mut acc = 0.0;
        for ((i, j), c) in self.terms() {
            acc += c.to_f64()? * x.powi(i as i32) * lx.powi(j as i32);
        }
        Some(acc)
    }

    /// Per-power coefficient norms `max_j |c_{i,j}|` for `i = 0..=trunc`.
    pub fn coefficient_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.trunc as usize + 1];
        for ((i, _), c) in self.terms() {
            let v = c.to_f64().map(f64::abs).unwrap_or(f64::NAN);
            let slot = &mut out[i as usize];
            *slot = f64::max(*slot, v);
        }
        out
    }
}

impl<R: Ring + fmt::Display> fmt::Display for PolyhomSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.var;
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (idx, ((i, j), c)) in self.terms().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "·{x}")?,
                _ => write!(f, "·{x}^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·log {x}")?,
                _ => write!(f, "·(log {x})^{j}")?,
            }
        }
        write!(f, " + O({x}^{})", self.trunc + 1)
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    let k = k.min(n - k) as i64;
    let n = n as i64;
    (0..k).fold(1i64, |acc, m| acc * (n - m) / (m + 1))
}

/// Coefficient types with a JSON representation.
///
/// Exact rationals become strings `"p/q"`, floats become JSON numbers, and
/// bivariate polynomials become arrays of `{"d", "t", "c"}` entries.
pub trait JsonCoeff: Ring {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, SeriesError>;
}

impl JsonCoeff for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self, SeriesError> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_i64(n.as_i64().unwrap_or(0))),
            other => Err(SeriesError::Parse(format!(
                "expected an exact rational string, got {other}"
            ))),
        }
    }
}

impl JsonCoeff for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }
    fn from_json(v: &Value) -> Result<Self, SeriesError> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| SeriesError::Parse(format!("bad number {n}"))),
            Value::String(s) => s
                .parse::<f64>()
                .or_else(|_| parse_rational(s).map(|q| crate::ring::rational_to_f64(&q)))
                .map_err(|_| SeriesError::Parse(format!("bad float {s:?}"))),
            other => Err(SeriesError::Parse(format!("expected a number, got {other}"))),
        }
    }
}

impl<R: JsonCoeff> JsonCoeff for BivariatePoly<R> {
    fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|((p, q), c)| json!({"d": p, "t": q, "c": c.to_json()}))
                .collect(),
        )
    }
    fn from_json(v: &Value) -> Result<Self, SeriesError> {
        let arr = v
            .as_array()
            .ok_or_else(|| SeriesError::Parse("expected a coefficient table".into()))?;
        let mut out = BivariatePoly::zero_poly();
        for entry in arr {
            let p = json_u32(entry, "d")?;
            let q = json_u32(entry, "t")?;
            let c = entry
                .get("c")
                .ok_or_else(|| SeriesError::Parse("missing \"c\"".into()))?;
            out.add_term(p, q, R::from_json(c)?);
        }
        Ok(out)
    }
}

fn json_u32(v: &Value, key: &str) -> Result<u32, SeriesError> {
    v.get(key)
        .and_then(Value::as_u64)
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| SeriesError::Parse(format!("missing or invalid {key:?}")))
}

impl<R: JsonCoeff> PolyhomSeries<R> {
    /// `{"variable": "d"|"t", "trunc": K, "terms": [{"i", "j", "c"}]}`, terms
    /// ordered by `(i, j)`.
    pub fn to_json(&self) -> Value {
        json!({
            "variable": self.var,
            "trunc": self.trunc,
            "terms": self
                .terms()
                .map(|((i, j), c)| json!({"i": i, "j": j, "c": c.to_json()}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeriesError> {
        let var: Var = serde_json::from_value(
            v.get("variable")
                .cloned()
                .ok_or_else(|| SeriesError::Parse("missing \"variable\"".into()))?,
        )
        .map_err(|e| SeriesError::Parse(e.to_string()))?;
        let trunc = json_u32(v, "trunc")?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| SeriesError::Parse("missing \"terms\"".into()))?;
        let mut out = Self::zero(var, trunc);
        for t in terms {
            let i = json_u32(t, "i")?;
            let j = json_u32(t, "j")?;
            let c = t
                .get("c")
                .ok_or_else(|| SeriesError::Parse("missing \"c\"".into()))?;
            out.add_term(i, j, R::from_json(c)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = PolyhomSeries<Rational>;

    fn q(p: i64, r: i64) -> Rational {
        Rational::from_ratio(p, r)
    }

    fn s(trunc: u32, terms: &[((u32, u32), Rational)]) -> S {
        S::from_terms(Var::D, trunc, terms.iter().cloned()).unwrap()
    }

    #[test]
    fn add_keeps_distinct_log_degrees() {
        let a = s(5, &[((2, 0), q(1, 1))]);
        let b = s(5, &[((2, 1), q(1, 1))]);
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, s(5, &[((2, 0), q(1, 1)), ((2, 1), q(1, 1))]));
    }

    #[test]
    fn mul_adds_powers_and_log_degrees() {
        let a = s(5, &[((1, 1), q(1, 1))]);
        assert_eq!(a.mul(&a).unwrap(), s(5, &[((2, 2), q(1, 1))]));
    }

    #[test]
    fn mul_truncates_at_smaller_order() {
        let a = s(2, &[((0, 0), q(1, 1)), ((1, 0), q(1, 2))]);
        assert_eq!(
            a.mul(&a).unwrap(),
            s(2, &[((0, 0), q(1, 1)), ((1, 0), q(1, 1)), ((2, 0), q(1, 4))])
        );
        let b = s(1, &[((1, 0), q(1, 1))]);
        assert_eq!(a.mul(&b).unwrap().trunc(), 1);
    }

    #[test]
    fn variable_mismatch_is_an_error() {
        let a = s(3, &[((1, 0), q(1, 1))]);
        let b = a.retag(Var::T);
        assert!(matches!(
            a.add(&b),
            Err(SeriesError::VariableMismatch { .. })
        ));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn banned_terms_rejected() {
        assert_eq!(
            S::monomial(Var::D, 4, 0, 1, q(1, 1)),
            Err(SeriesError::BannedTerm { i: 0, j: 1 })
        );
        // zero coefficient is harmless
        assert!(S::monomial(Var::D, 4, 0, 1, q(0, 1)).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let a = s(6, &[((2, 1), q(1, 1))]);
        assert_eq!(
            a.ddx().unwrap(),
            s(5, &[((1, 1), q(2, 1)), ((1, 0), q(1, 1))])
        );
        assert_eq!(s(6, &[((3, 0), q(1, 1))]).ddx().unwrap(), s(5, &[((2, 0), q(3, 1))]));
        assert_eq!(
            s(6, &[((3, 2), q(1, 1))]).ddx().unwrap(),
            s(5, &[((2, 2), q(3, 1)), ((2, 1), q(2, 1))])
        );
    }

    #[test]
    fn derivative_rejects_unrepresentable_results() {
        let a = s(6, &[((1, 1), q(1, 1))]);
        assert_eq!(a.ddx(), Err(SeriesError::NonDifferentiable { i: 1, j: 1 }));
        assert_eq!(
            S::zero(Var::D, 0).ddx(),
            Err(SeriesError::TruncationExhausted)
        );
        // the Euler operator handles the same term fine
        assert_eq!(a.euler(), s(6, &[((1, 1), q(1, 1)), ((1, 0), q(1, 1))]));
    }

    #[test]
    fn substitution_examples() {
        let a = s(4, &[((3, 0), q(1, 1))]);
        let t = a.substitute_d_to_t().unwrap();
        assert_eq!(t.var(), Var::T);
        assert_eq!(t.trunc(), 8);
        assert_eq!(t.coeff(6, 0), Some(&q(1, 8)));

        let f = PolyhomSeries::<f64>::from_terms(Var::D, 3, [((1, 1), 1.0)]).unwrap();
        let ft = f.substitute_d_to_t().unwrap();
        // (t²/2)(2 log t − log 2) = t² log t − (log 2 / 2) t²
        assert_eq!(ft.coeff(2, 1), Some(&1.0));
        assert!((ft.coeff(2, 0).unwrap() + std::f64::consts::LN_2 / 2.0).abs() < 1e-16);
        let x: f64 = 0.3;
        let direct = f.eval_f64(x * x / 2.0).unwrap();
        assert!((ft.eval_f64(x).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn exact_substitution_of_log_terms_is_a_capability_error() {
        let a = s(4, &[((1, 1), q(1, 1))]);
        assert!(matches!(
            a.substitute_d_to_t(),
            Err(SeriesError::RingCapability { .. })
        ));
        assert!(a.retag(Var::T).substitute_d_to_t().is_err());
    }

    #[test]
    fn compose_exp_of_identity() {
        let x = s(5, &[((1, 0), q(1, 1))]);
        let mut fact = 1i64;
        let exp: Vec<Rational> = (0..10)
            .map(|m| {
                if m > 0 {
                    fact *= m;
                }
                q(1, fact)
            })
            .collect();
        let e = S::compose_analytic(&exp, &x).unwrap();
        let want: Vec<_> = (0..=5u32).map(|m| ((m, 0), exp[m as usize].clone())).collect();
        assert_eq!(e, s(5, &want));
    }

    #[test]
    fn compose_log_one_plus_against_closed_form() {
        // log(1 + x + x²) = log(1 − x³) − log(1 − x): coefficient of x^m is
        // 1/m − 3/m when 3 | m, 1/m otherwise.
        let k = 12;
        let a = s(k, &[((1, 0), q(1, 1)), ((2, 0), q(1, 1))]);
        let log1p: Vec<Rational> = (0..=k as i64)
            .map(|m| if m == 0 { q(0, 1) } else { q(if m % 2 == 1 { 1 } else { -1 }, m) })
            .collect();
        let got = S::compose_analytic(&log1p, &a).unwrap();
        for m in 1..=k as i64 {
            let want = if m % 3 == 0 { q(1, m) - q(3, m) } else { q(1, m) };
            assert_eq!(got.coeff_or_zero(m as u32, 0), want, "x^{m}");
        }
        assert_eq!(got.coeff(1, 0), Some(&q(1, 1)));
        assert_eq!(got.coeff(2, 0), Some(&q(1, 2)));
    }

    #[test]
    fn compose_with_zero_and_bad_argument() {
        let zero = S::zero(Var::D, 4);
        let f = [q(7, 3), q(1, 1), q(5, 1)];
        assert_eq!(S::compose_analytic(&f, &zero).unwrap(), s(4, &[((0, 0), q(7, 3))]));
        let bad = s(4, &[((0, 0), q(1, 1))]);
        assert_eq!(
            S::compose_analytic(&f, &bad),
            Err(SeriesError::NonzeroConstantTerm)
        );
    }

    #[test]
    fn residual_order_examples() {
        assert_eq!(S::zero(Var::D, 10).residual_order(), 11);
        let a = s(10, &[((3, 1), q(1, 1)), ((5, 0), q(1, 1))]);
        assert_eq!(a.residual_order(), 3);
        assert_eq!(a.log_degrees(), BTreeMap::from([(3, 1), (5, 0)]));
    }

    #[test]
    fn json_round_trip_and_format() {
        let a = s(4, &[((2, 0), q(-1, 3)), ((3, 1), q(1, 4))]);
        let v = a.to_json();
        assert_eq!(
            v.to_string(),
            r#"{"terms":[{"c":"-1/3","i":2,"j":0},{"c":"1/4","i":3,"j":1}],"trunc":4,"variable":"d"}"#
        );
        assert_eq!(S::from_json(&v).unwrap(), a);
        let f = a.map_coeffs(|c| c.to_f64().unwrap());
        let back = PolyhomSeries::<f64>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn bivariate_coefficients_form_a_ring() {
        let x = BivariatePoly::monomial(1, 0, q(1, 1));
        let y = BivariatePoly::monomial(0, 1, q(1, 1));
        let a = PolyhomSeries::from_terms(Var::D, 4, [((1, 0), x.clone()), ((2, 0), y.clone())])
            .unwrap();
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coeff(2, 0), Some(&x.times(&x)));
        assert_eq!(sq.coeff(3, 0), Some(&x.times(&y).scale(&q(2, 1))));
        assert_eq!(sq.coeff(4, 0), Some(&y.times(&y)));
        let back = PolyhomSeries::<BivariatePoly<Rational>>::from_json(&sq.to_json()).unwrap();
        assert_eq!(back, sq);
    }
}
