//! Finite-difference solver for the linear `t`-form model ODE
//! `t²v'' − (2n−1)t v' − 4(n+1)v = t² f(t)` on `[t0, T]`, and least-squares
//! recovery of power/log coefficients from grid data.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::error::OracleError;

pub const MIN_GRID: usize = 16;
pub const MIN_T0: f64 = 1e-3;
pub const MAX_BASIS: usize = 6;
pub const CONDITION_LIMIT: f64 = 1e8;

/// Samples on the uniform grid `t_i = t0 + i h`, `i = 0..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub n: u32,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// `f(t_i)`.
    pub forcing: Vec<f64>,
}

impl GridSolution {
    pub fn h(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// Largest `|v_i − exact(t_i)|`.
    pub fn max_error(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.t
            .iter()
            .zip(&self.values)
            .map(|(t, v)| (v - exact(*t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,v\n");
        for (t, v) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{},{}\n", crate::fmt_f64(*t), crate::fmt_f64(*v)));
        }
        s
    }
}

/// Solves a tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < f64::MIN_POSITIVE {
        return Err(OracleError::Singular { row: 0 });
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom.abs() < f64::MIN_POSITIVE {
            return Err(OracleError::Singular { row: i });
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Second-order centered differences with Dirichlet data `bc = (v(t0), v(T))`.
pub fn solve_bvp(
    n: u32,
    f: &dyn Fn(f64) -> f64,
    t0: f64,
    t_end: f64,
    m: usize,
    bc: (f64, f64),
) -> Result<GridSolution, OracleError> {
    if m < MIN_GRID {
        return Err(OracleError::InvalidGrid(format!("need m >= {MIN_GRID}, got {m}")));
    }
    if !(t0 >= MIN_T0 && t_end > t0 && t_end.is_finite()) {
        return Err(OracleError::InvalidGrid(format!(
            "need {MIN_T0} <= t0 < T, got t0={t0}, T={t_end}"
        )));
    }
    let h = (t_end - t0) / m as f64;
    let t: Vec<f64> = (0..=m).map(|i| t0 + i as f64 * h).collect();
    let forcing: Vec<f64> = t.iter().map(|&x| f(x)).collect();
    let b = 2.0 * n as f64 - 1.0;
    let c0 = 4.0 * (n as f64 + 1.0);

    let inner = m - 1;
    let mut lower = vec![0.0; inner];
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for r in 0..inner {
        let i = r + 1;
        let ti = t[i];
        let a2 = ti * ti / (h * h);
        let a1 = b * ti / (2.0 * h);
        lower[r] = a2 + a1;
        diag[r] = -2.0 * a2 - c0;
        upper[r] = a2 - a1;
        rhs[r] = ti * ti * forcing[i];
    }
    rhs[0] -= lower[0] * bc.0;
    rhs[inner - 1] -= upper[inner - 1] * bc.1;
    lower[0] = 0.0;
    upper[inner - 1] = 0.0;
    let x = thomas(&lower, &diag, &upper, &rhs)?;

    let mut values = Vec::with_capacity(m + 1);
    values.push(bc.0);
    values.extend(x);
    values.push(bc.1);
    Ok(GridSolution { n, t, values, forcing })
}

/// Coefficients for `Σ c_{ij} t^i (log t)^j` fitted to grid data.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFit {
    pub basis: Vec<(u32, u32)>,
    pub coefficients: Vec<f64>,
    /// Condition number of the column-normalized design matrix.
    pub condition: f64,
    pub rms_residual: f64,
}

impl CoefficientFit {
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .basis
            .iter()
            .zip(&self.coefficients)
            .map(|((i, j), c)| json!({"i": i, "j": j, "c": c}))
            .collect();
        json!({
            "terms": terms,
            "condition": self.condition,
            "rms_residual": self.rms_residual,
        })
    }
}

pub fn basis_value(t: f64, i: u32, j: u32) -> f64 {
    t.powi(i as i32) * t.ln().powi(j as i32)
}

/// Least squares against `{t^i (log t)^j}` with each column scaled to unit
/// norm; refuses bases whose scaled condition number exceeds [`CONDITION_LIMIT`].
pub fn fit_coefficients(
    sol: &GridSolution,
    basis: &[(u32, u32)],
) -> Result<CoefficientFit, OracleError> {
    if basis.is_empty() || basis.len() > MAX_BASIS {
        return Err(OracleError::BasisSize {
            max: MAX_BASIS,
            got: basis.len(),
        });
    }
    let rows = sol.t.len();
    if rows < basis.len() {
        return Err(OracleError::InvalidGrid(format!(
            "{rows} samples cannot determine {} coefficients",
            basis.len()
        )));
    }
    let mut x = DMatrix::from_fn(rows, basis.len(), |r, c| {
        basis_value(sol.t[r], basis[c].0, basis[c].1)
    });
    let mut scales = Vec::with_capacity(basis.len());
    for mut col in x.column_iter_mut() {
        let s = col.norm();
        if s > 0.0 {
            col /= s;
        }
        scales.push(s);
    }
    let y = DVector::from_column_slice(&sol.values);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(OracleError::IllConditioned {
            cond: condition,
            limit: CONDITION_LIMIT,
        });
    }
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|e| OracleError::InvalidGrid(e.to_string()))?;
    let resid = &x * &beta - &y;
    let coefficients = beta
        .iter()
        .zip(&scales)
        .map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 })
        .collect();
    Ok(CoefficientFit {
        basis: basis.to_vec(),
        coefficients,
        condition,
        rms_residual: (resid.norm_squared() / rows as f64).sqrt(),
    })
}

/// Grid-shaped container for analytic samples, for fitting closed forms.
pub fn sample(n: u32, exact: impl Fn(f64) -> f64, t0: f64, t_end: f64, m: usize) -> GridSolution {
    let h = (t_end - t0) / m as f64;
    let t: Vec<f64> = (0..=m).map(|i| t0 + i as f64 * h).collect();
    let values = t.iter().map(|&x| exact(x)).collect();
    GridSolution {
        n,
        forcing: vec![0.0; t.len()],
        t,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manufactured_t4(m: usize) -> f64 {
        let exact = |t: f64| t.powi(4);
        let (t0, t1) = (0.1, 1.0);
        let sol = solve_bvp(2, &|t| -12.0 * t * t, t0, t1, m, (exact(t0), exact(t1))).unwrap();
        sol.max_error(exact)
    }

    #[test]
    fn second_order_convergence() {
        let errs: Vec<f64> = [32, 64, 128, 256].iter().map(|&m| manufactured_t4(m)).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn resonant_homogeneous_solution() {
        let exact = |t: f64| t.powi(6);
        let sol = solve_bvp(2, &|_| 0.0, 0.2, 1.0, 200, (exact(0.2), 1.0)).unwrap();
        let h = sol.h();
        assert!(sol.max_error(exact) < 10.0 * h * h);
    }

    #[test]
    fn zero_data_gives_zero() {
        let sol = solve_bvp(3, &|_| 0.0, 0.5, 2.0, 40, (0.0, 0.0)).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(
            solve_bvp(2, &|_| 0.0, 0.1, 1.0, 8, (0.0, 0.0)),
            Err(OracleError::InvalidGrid(_))
        ));
        assert!(matches!(
            solve_bvp(2, &|_| 0.0, 1e-4, 1.0, 32, (0.0, 0.0)),
            Err(OracleError::InvalidGrid(_))
        ));
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let lower = [0.0, 1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 2.0, 1.0, 0.0];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = thomas(&lower, &diag, &upper, &rhs).unwrap();
        let a = DMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                diag[i]
            } else if j + 1 == i {
                lower[i]
            } else if i + 1 == j {
                upper[i]
            } else {
                0.0
            }
        });
        let dense = a.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        for (p, q) in x.iter().zip(dense.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(
            thomas(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]),
            Err(OracleError::Singular { row: 0 })
        );
    }

    #[test]
    fn fit_examples() {
        let s = sample(2, |t| 2.0 * t.powi(4) - t.powi(6), 0.1, 1.0, 64);
        let fit = fit_coefficients(&s, &[(4, 0), (6, 0)]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-6);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-6);

        let s = sample(2, |t| t.powi(6) * t.ln(), 0.1, 1.0, 64);
        let fit = fit_coefficients(&s, &[(6, 0), (6, 1)]).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-6);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-6);

        let exact = |t: f64| t.powi(4);
        let sol = solve_bvp(2, &|t| -12.0 * t * t, 0.1, 1.0, 128, (exact(0.1), 1.0)).unwrap();
        let fit = fit_coefficients(&sol, &[(4, 0)]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 10.0 * sol.h().powi(2));
    }

    #[test]
    fn fit_refusals() {
        let s = sample(2, |t| t, 0.1, 1.0, 32);
        assert!(matches!(
            fit_coefficients(&s, &[(1, 0), (1, 0)]),
            Err(OracleError::IllConditioned { .. })
        ));
        assert!(matches!(
            fit_coefficients(&s, &[(0, 0); 7]),
            Err(OracleError::BasisSize { .. })
        ));
        assert!(matches!(fit_coefficients(&s, &[]), Err(OracleError::BasisSize { .. })));
    }
}
