//! The divergent formal solution
//! `v̄ = Σ_k a_k s^{2k}/(2k)!`, `a_k = (−A/d)^k (d^{n+1} w)`, of the degenerate
//! model equation `d²v_dd + d²v_tt + d·v_ss − (n−1)d·v_d − (n+1)v = 0`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::bivariate::BivariatePoly;
use crate::error::CexError;
use crate::ring::{ln_abs, Rational, Ring};
use crate::series::JsonCoeff;

/// Largest `kmax` accepted by [`build_cex_series`].
pub const MAX_KMAX: usize = 64;
/// Largest `kmax` accepted by [`growth_ledger`].
pub const MAX_LEDGER_KMAX: usize = 12;

type Poly = BivariatePoly<Rational>;

/// `A h = d² h_dd + d² h_tt − (n−1) d h_d − (n+1) h`.
pub fn apply_a(n: u32, h: &Poly) -> Poly {
    let n = n as i64;
    let dd = h.ddd().ddd().shift(2, 0);
    let tt = h.ddt().ddt().shift(2, 0);
    let d1 = h.ddd().shift(1, 0).scale(&Rational::from_i64(n - 1));
    let h0 = h.scale(&Rational::from_i64(n + 1));
    dd.plus(&tt).minus(&d1).minus(&h0)
}

/// Seed, dimension and the coefficients `a_0..=a_kmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct CexState {
    pub n: u32,
    pub seed_w: Poly,
    pub a: Vec<Poly>,
    pub kmax: usize,
}

pub fn build_cex_series(n: u32, seed_w: &Poly, kmax: usize) -> Result<CexState, CexError> {
    if kmax > MAX_KMAX {
        return Err(CexError::KmaxTooLarge { kmax, max: MAX_KMAX });
    }
    let mut a = Vec::with_capacity(kmax + 1);
    a.push(seed_w.shift(n + 1, 0));
    for k in 0..kmax {
        let next = apply_a(n, &a[k])
            .div_d(1)
            .ok_or(CexError::DivisionByD { k })?
            .negated();
        if !next.divisible_by_d(n + 1) {
            return Err(CexError::MissingFactor { k: k + 1, power: n + 1 });
        }
        a.push(next);
    }
    Ok(CexState {
        n,
        seed_w: seed_w.clone(),
        a,
        kmax,
    })
}

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(<BigInt as One>::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients of `s^{2k}`, `k = 0..=kmax`, of `(A + d ∂_ss) Σ a_k s^{2k}/(2k)!`.
pub fn cex_residual(state: &CexState) -> Vec<Poly> {
    (0..state.a.len())
        .map(|k| {
            let mut r = apply_a(state.n, &state.a[k]);
            if let Some(next) = state.a.get(k + 1) {
                r = r.plus(&next.shift(1, 0));
            }
            let inv = BigRational::new(<BigInt as One>::one(), factorial(2 * k));
            r.scale(&inv)
        })
        .collect()
}

/// Index of the first nonzero residual coefficient, if any.
pub fn first_nonzero_residual(state: &CexState) -> Option<usize> {
    cex_residual(state).iter().position(|r| !r.is_zero_poly())
}

impl CexState {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "kmax": self.kmax,
            "seed": self.seed_w.to_json(),
            "a": self.a.iter().map(JsonCoeff::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CexError> {
        let bad = |m: &str| crate::error::SeriesError::Parse(m.to_string());
        let n = v["n"].as_u64().ok_or_else(|| bad("missing n"))? as u32;
        let kmax = v["kmax"].as_u64().ok_or_else(|| bad("missing kmax"))? as usize;
        let seed_w = match v.get("seed") {
            Some(s) => Poly::from_json(s)?,
            None => Poly::zero_poly(),
        };
        let a = v["a"]
            .as_array()
            .ok_or_else(|| bad("missing a"))?
            .iter()
            .map(Poly::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { n, seed_w, a, kmax })
    }

    /// `ln |h_k(0, 0)|` where `a_k = d^{n+1} h_k`; `-inf` when it vanishes.
    pub fn log_origin_values(&self) -> Vec<f64> {
        self.a
            .iter()
            .map(|a| a.coeff(self.n + 1, 0).map_or(f64::NEG_INFINITY, ln_abs))
            .collect()
    }

    /// `ln max |coefficient|` of each `a_k`; `-inf` for `a_k = 0`.
    pub fn log_max_coefficients(&self) -> Vec<f64> {
        self.a.iter().map(log_max_coeff).collect()
    }
}

fn log_max_coeff(p: &Poly) -> f64 {
    p.terms()
        .map(|(_, c)| ln_abs(c))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// How [`growth_ledger`] produces its sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LedgerMode {
    /// Run the exact recursion on a truncated seed whose Taylor coefficients
    /// sit on the bound `|∂^α w| ≤ C^{|α|+1} (2α)!`, and report `h_k(0, 0)`.
    /// Coefficients far from the origin are dominated by the truncation.
    SaturatingSeed,
    /// Propagate that bound through `h_{k+1} = −(d Δh + (n+3) ∂_d h)`,
    /// the recursion for `a_k = d^{n+1} h_k`, with `|d| ≤ 1`.
    SymbolicBound,
}

fn check_ledger_args(bound_c: f64, kmax: usize) -> Result<(), CexError> {
    if kmax > MAX_LEDGER_KMAX {
        return Err(CexError::KmaxTooLarge {
            kmax,
            max: MAX_LEDGER_KMAX,
        });
    }
    if !bound_c.is_finite() || bound_c < 0.0 {
        return Err(CexError::InvalidBound(bound_c));
    }
    Ok(())
}

/// Polynomial of total degree `2·kmax` with coefficients
/// `C^{p+q+1} (2p)!(2q)! / (p! q!)` on `d^p t^q`.
pub fn saturating_seed(bound_c: f64, kmax: usize) -> Result<Poly, CexError> {
    check_ledger_args(bound_c, kmax)?;
    let c = BigRational::from_float(bound_c).ok_or(CexError::InvalidBound(bound_c))?;
    let deg = 2 * kmax as u32;
    let mut seed = Poly::zero_poly();
    for p in 0..=deg {
        for q in 0..=(deg - p) {
            let num = factorial(2 * p as usize) * factorial(2 * q as usize);
            let den = factorial(p as usize) * factorial(q as usize);
            let coeff = num_traits::pow(c.clone(), (p + q + 1) as usize) * BigRational::new(num, den);
            seed.add_term(p, q, coeff);
        }
    }
    Ok(seed)
}

/// Seed with every monomial of total degree `≤ degree` and small random
/// rational coefficients `p/q`, `|p| ≤ 4`, `1 ≤ q ≤ 3`.
pub fn random_seed<G: rand::Rng>(degree: u32, rng: &mut G) -> Poly {
    let mut seed = Poly::zero_poly();
    for p in 0..=degree {
        for q in 0..=(degree - p) {
            let num: i64 = rng.random_range(-4..=4);
            let den: i64 = rng.random_range(1..=3);
            seed.add_term(p, q, Rational::from_ratio(num, den));
        }
    }
    seed
}

/// `ln max |coeff(a_k)|` for `k = 0..=kmax`, from a given seed.
pub fn ledger_for_seed(n: u32, seed: &Poly, kmax: usize) -> Result<Vec<f64>, CexError> {
    Ok(build_cex_series(n, seed, kmax)?.log_max_coefficients())
}

fn ln_factorial(m: u32) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn symbolic_bound(n: u32, bound_c: f64, kmax: usize) -> Vec<f64> {
    // h_k = Σ c · d^p ∂_d^a ∂_t^b w, keyed by (p, a, b)
    let mut terms: BTreeMap<(u32, u32, u32), Rational> = BTreeMap::new();
    terms.insert((0, 0, 0), <Rational as Ring>::one());
    let ln_c = bound_c.ln();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let logs: Vec<f64> = terms
            .iter()
            .map(|(&(_, a, b), c)| {
                ln_abs(c)
                    + (a + b + 1) as f64 * ln_c
                    + ln_factorial(2 * a)
                    + ln_factorial(2 * b)
            })
            .collect();
        out.push(if bound_c == 0.0 {
            f64::NEG_INFINITY
        } else {
            log_sum_exp(&logs)
        });
        if k == kmax {
            break;
        }
        let mut next: BTreeMap<(u32, u32, u32), Rational> = BTreeMap::new();
        let mut add = |key: (u32, u32, u32), c: Rational| {
            let e = next.entry(key).or_insert_with(<Rational as Ring>::zero);
            *e += c;
        };
        let n3 = Rational::from_i64(n as i64 + 3);
        for (&(p, a, b), c) in &terms {
            // ∂_d (d^p X) = p d^{p−1} X + d^p ∂_d X
            let pf = Rational::from_i64(p as i64);
            // −d ∂_dd (d^p X)
            add((p + 1, a + 2, b), -c.clone());
            if p >= 1 {
                add((p, a + 1, b), -(c * &pf) * Rational::from_i64(2));
            }
            if p >= 2 {
                add((p - 1, a, b), -(c * &pf) * Rational::from_i64(p as i64 - 1));
            }
            // −d ∂_tt (d^p X)
            add((p + 1, a, b + 2), -c.clone());
            // −(n+3) ∂_d (d^p X)
            add((p, a + 1, b), -(c * &n3));
            if p >= 1 {
                add((p - 1, a, b), -(c * &n3) * &pf);
            }
        }
        next.retain(|_, c| !Ring::is_zero(c));
        terms = next;
    }
    out
}

/// `ln` of the coefficient scale of `a_k` for `k = 0..=kmax`.
pub fn growth_ledger(
    n: u32,
    bound_c: f64,
    kmax: usize,
    mode: LedgerMode,
) -> Result<Vec<f64>, CexError> {
    check_ledger_args(bound_c, kmax)?;
    match mode {
        LedgerMode::SaturatingSeed => {
            let state = build_cex_series(n, &saturating_seed(bound_c, kmax)?, kmax)?;
            Ok(state.log_origin_values())
        }
        LedgerMode::SymbolicBound => Ok(symbolic_bound(n, bound_c, kmax)),
    }
}

/// `k,log_max_coeff` rows with fixed formatting.
pub fn ledger_csv(values: &[f64]) -> String {
    let mut s = String::from("k,log_max_coeff\n");
    for (k, v) in values.iter().enumerate() {
        s.push_str(&format!("{k},{}\n", crate::fmt_f64(*v)));
    }
    s
}
