//! Monge-Ampère specific pieces: the log-determinant trace series, the model
//! problem presets in `d`- and `t`-form, and the unit-ball benchmark.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::error::{CmaError, FuchsianError};
use crate::fuchsian::{solve_polyhom, FuchsianProblem, Node, Program};
use crate::ring::{format_rational, Field, Rational, Ring};
use crate::series::{PolyhomSeries, Var};

/// Constant parts of a matrix input must have spectral radius below this.
pub const SPECTRAL_RADIUS_LIMIT: f64 = 0.5;

/// Input to [`logdet_series`]: either the entries of `X = M⁻¹N` or the
/// precomputed trace powers `τ_k = Tr(X^k)`, `τ_1` first.
#[derive(Clone, Debug)]
pub enum TracePowerInput<R: Ring> {
    Matrix(Vec<Vec<PolyhomSeries<R>>>),
    TracePowers(Vec<PolyhomSeries<R>>),
}

pub fn matrix_trace<R: Ring>(m: &[Vec<PolyhomSeries<R>>]) -> Result<PolyhomSeries<R>, FuchsianError> {
    let first = m
        .first()
        .and_then(|r| r.first())
        .ok_or(FuchsianError::NotSquare)?;
    let mut acc = PolyhomSeries::zero(first.var(), first.trunc());
    for (i, row) in m.iter().enumerate() {
        acc = acc.add(&row[i])?;
    }
    Ok(acc)
}

#[allow(clippy::needless_range_loop)]
fn matrix_mul<R: Ring>(
    a: &[Vec<PolyhomSeries<R>>],
    b: &[Vec<PolyhomSeries<R>>],
) -> Result<Vec<Vec<PolyhomSeries<R>>>, FuchsianError> {
    let n = a.len();
    let proto = &a[0][0];
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut out_row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = PolyhomSeries::zero(proto.var(), proto.trunc());
            for (l, entry) in row.iter().enumerate() {
                if entry.is_zero() || b[l][j].is_zero() {
                    continue;
                }
                acc = acc.add(&entry.mul(&b[l][j])?)?;
            }
            out_row.push(acc);
        }
        out.push(out_row);
    }
    Ok(out)
}

fn check_spectral_radius<R: Ring>(m: &[Vec<PolyhomSeries<R>>]) -> Result<(), FuchsianError> {
    let n = m.len();
    if m.iter().flatten().all(|e| e.coeff(0, 0).is_none()) {
        return Ok(());
    }
    let mut vals = Vec::with_capacity(n * n);
    for row in m {
        for e in row {
            let v = match e.coeff(0, 0) {
                None => 0.0,
                Some(c) => c.to_f64().ok_or(FuchsianError::SpectralUnknown)?,
            };
            vals.push(v);
        }
    }
    let rho = spectral_radius(&DMatrix::from_row_slice(n, n, &vals));
    if !rho.is_finite() || rho >= SPECTRAL_RADIUS_LIMIT {
        return Err(FuchsianError::SpectralRadius {
            rho,
            limit: SPECTRAL_RADIUS_LIMIT,
        });
    }
    Ok(())
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `Σ_{k=1}^{K} (−1)^{k−1} τ_k / k`, the truncated series for `log det(I + X)`.
///
/// Entries with a nonzero constant part are accepted only when that constant
/// matrix has spectral radius below [`SPECTRAL_RADIUS_LIMIT`]; entries with
/// positive leading order always converge formally. Missing trace powers in
/// [`TracePowerInput::TracePowers`] count as zero.
pub fn logdet_series<R: Ring>(
    input: &TracePowerInput<R>,
    k: u32,
) -> Result<PolyhomSeries<R>, FuchsianError> {
    let taus: Vec<PolyhomSeries<R>> = match input {
        TracePowerInput::TracePowers(t) => t.iter().take(k as usize).cloned().collect(),
        TracePowerInput::Matrix(m) => {
            if m.is_empty() || m.iter().any(|row| row.len() != m.len()) {
                return Err(FuchsianError::NotSquare);
            }
            check_spectral_radius(m)?;
            let mut taus = Vec::with_capacity(k as usize);
            let mut power = m.clone();
            for step in 1..=k {
                taus.push(matrix_trace(&power)?);
                if power.iter().flatten().all(PolyhomSeries::is_zero) {
                    break;
                }
                if step < k {
                    power = matrix_mul(&power, m)?;
                }
            }
            taus
        }
    };
    let Some(first) = taus.first() else {
        return Err(FuchsianError::NotSquare);
    };
    let trunc = taus.iter().map(PolyhomSeries::trunc).min().unwrap_or(0).min(k);
    let mut acc = PolyhomSeries::zero(first.var(), trunc);
    for (idx, tau) in taus.iter().enumerate() {
        let kk = idx as i64 + 1;
        let sign = if kk % 2 == 1 { 1 } else { -1 };
        acc = acc.add(&tau.scale(&R::from_ratio(sign, kk)))?;
    }
    Ok(acc)
}

/// Which normalization of the model operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// `d² v'' − (n−1) d v' − (n+1) v`.
    D,
    /// `t² v'' − (2n−1) t v' − 4(n+1) v`, the `d`-form rewritten with
    /// `d = t²/2` and multiplied by 4.
    T,
    /// The operator obtained for `v₁ = v' − 2v/t`:
    /// `t² v₁'' − (2n−3) t v₁' − (6n+3) v₁`, roots `{2n+1, −3}`.
    TDerived,
}

/// Optional data slots of the model problem.
#[derive(Clone, Debug)]
pub struct ModelOptions<R: Ring> {
    pub c1: Option<PolyhomSeries<R>>,
    pub cd: Option<PolyhomSeries<R>>,
    pub forcing: Option<PolyhomSeries<R>>,
    /// Attach the trace-power nonlinearity (not available for `TDerived`).
    pub nonlinear: bool,
}

impl<R: Ring> Default for ModelOptions<R> {
    fn default() -> Self {
        Self {
            c1: None,
            cd: None,
            forcing: None,
            nonlinear: false,
        }
    }
}

/// Radial nonlinearity `F₂ = −(log det(I + X) − Tr X)` with
/// `X = diag(d²v'', −d v', …, −d v')`, so that `Tr X` is the first-order
/// part of the operator. In `t`-form the entries are rewritten through
/// `d = t²/2` and the result scaled by 4.
pub fn model_program<R: Field>(n: u32, form: Form) -> Result<Program<R>, FuchsianError> {
    let mut prog = Program::new();
    let v = prog.push(Node::Input)?;
    let th = prog.push(Node::Euler(v))?;
    let th2 = prog.push(Node::Euler(th))?;
    let (normal, tangential, outer) = match form {
        Form::D => {
            let normal = prog.push(Node::Sub(th2, th))?;
            let tangential = prog.push(Node::Scale(th, R::from_i64(-1)))?;
            (normal, tangential, R::from_i64(-1))
        }
        Form::T => {
            // d² v_dd = (θ_t² − 2θ_t) v / 4, d v_d = θ_t v / 2
            let two_th = prog.push(Node::Scale(th, R::from_i64(2)))?;
            let diff = prog.push(Node::Sub(th2, two_th))?;
            let normal = prog.push(Node::Scale(diff, R::from_ratio(1, 4)))?;
            let tangential = prog.push(Node::Scale(th, R::from_ratio(-1, 2)))?;
            (normal, tangential, R::from_i64(-4))
        }
        Form::TDerived => {
            return Err(FuchsianError::InvalidProgram(
                "the derived t-form preset is linear only".into(),
            ))
        }
    };
    let n = n as usize;
    let matrix: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, i) {
                    (true, 0) => Some(normal),
                    (true, _) => Some(tangential),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let higher = prog.push(Node::LogDetHigher { matrix })?;
    prog.push(Node::Scale(higher, outer))?;
    Ok(prog)
}

/// Leading coefficients `(a₁, a₀)` of the chosen form.
pub fn model_coefficients(n: u32, form: Form) -> (Rational, Rational) {
    let n = n as i64;
    match form {
        Form::D => (Rational::from_i64(-(n - 1)), Rational::from_i64(-(n + 1))),
        Form::T => (Rational::from_i64(-(2 * n - 1)), Rational::from_i64(-4 * (n + 1))),
        Form::TDerived => (Rational::from_i64(-(2 * n - 3)), Rational::from_i64(-(6 * n + 3))),
    }
}

pub fn assemble_model<R: Field>(
    n: u32,
    form: Form,
    opts: ModelOptions<R>,
) -> Result<FuchsianProblem<R>, FuchsianError> {
    let var = match form {
        Form::D => Var::D,
        Form::T | Form::TDerived => Var::T,
    };
    let (a1, a0) = model_coefficients(n, form);
    let mut p = FuchsianProblem::linear(n, var, a1, a0)?.with_perturbation(opts.c1, opts.cd)?;
    if let Some(f) = opts.forcing {
        p = p.with_forcing(f);
    }
    if opts.nonlinear {
        p = p.with_nonlinearity(model_program(n, form)?);
    }
    Ok(p)
}

/// `c_{r,1}` at the first nonnegative resonance `r` (`n+1` in `d`-form).
pub fn first_log_coefficient<R: Field>(p: &FuchsianProblem<R>, k: u32) -> Result<R, FuchsianError> {
    let res = solve_polyhom(p, k, &p.free)?;
    Ok(p.first_resonance()
        .map(|r| res.expansion.coeff_or_zero(r, 1))
        .unwrap_or_else(R::zero))
}

/// Result of [`ball_benchmark`].
#[derive(Clone, Debug, PartialEq)]
pub struct BallBenchmarkReport {
    pub n: u32,
    pub k: u32,
    pub grid: Vec<f64>,
    /// `|det(w_{ij̄}) − e^{(n+1)w}| / e^{(n+1)w}` per grid radius.
    pub residuals: Vec<f64>,
    pub max_pointwise_residual: f64,
    /// Largest `|forcing|` induced by the ball data on the grid.
    pub forcing_max: f64,
    pub expansion_coeff_max: Rational,
    pub expansion_zero: bool,
    pub c_n1_log: Rational,
}

impl BallBenchmarkReport {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "K": self.k,
            "grid": self.grid,
            "residuals": self.residuals,
            "expansion_zero": self.expansion_zero,
            "c_n1_log": format_rational(&self.c_n1_log),
        })
    }
}

/// `det(w_{ij̄})` for `w = −log(1 − r²)` on the unit ball, via the rank-one
/// update `det(aI + b z z̄ᵀ) = a^{n−1}(a + b r²)` with `a = 1/(1−r²)`, `b = a²`.
pub fn ball_hessian_det(n: u32, r: f64) -> f64 {
    let a = 1.0 / (1.0 - r * r);
    let b = a * a;
    a.powi(n as i32 - 1) * (a + b * r * r)
}

/// Forcing `−log(det(ρ_{ij̄})(−ρ + ρ^{ij̄} ρ_i ρ_{j̄}))` for `ρ = |z|² − 1`:
/// `ρ_{ij̄} = δ_{ij}` and `ρ^{ij̄} ρ_i ρ_{j̄} = r²`.
pub fn ball_forcing(_n: u32, r: f64) -> f64 {
    let det_rho = 1.0;
    let rho = r * r - 1.0;
    -(det_rho * (-rho + r * r)).ln()
}

pub fn ball_benchmark(n: u32, k: u32, grid: &[f64]) -> Result<BallBenchmarkReport, CmaError> {
    if grid.is_empty() {
        return Err(CmaError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(CmaError::GridOutOfRange(bad));
    }
    let residuals: Vec<f64> = grid
        .iter()
        .map(|&r| {
            let w = -(1.0 - r * r).ln();
            let rhs = ((n + 1) as f64 * w).exp();
            (ball_hessian_det(n, r) - rhs).abs() / rhs
        })
        .collect();
    let max_pointwise_residual = residuals.iter().copied().fold(0.0, f64::max);
    let forcing_max = grid
        .iter()
        .map(|&r| ball_forcing(n, r).abs())
        .fold(0.0, f64::max);

    // The induced forcing reduces to −log 1 = 0 identically.
    let forcing = PolyhomSeries::<Rational>::zero(Var::D, k);
    let problem = assemble_model(
        n,
        Form::D,
        ModelOptions {
            forcing: Some(forcing),
            nonlinear: true,
            ..ModelOptions::default()
        },
    )?;
    let res = solve_polyhom(&problem, k, &BTreeMap::new())?;
    let expansion_coeff_max = res
        .expansion
        .terms()
        .map(|(_, c)| c.abs())
        .max()
        .unwrap_or_else(<Rational as Ring>::zero);
    let c_n1_log = res.expansion.coeff_or_zero(n + 1, 1);
    Ok(BallBenchmarkReport {
        n,
        k,
        grid: grid.to_vec(),
        residuals,
        max_pointwise_residual,
        forcing_max,
        expansion_zero: res.expansion.is_zero(),
        expansion_coeff_max,
        c_n1_log,
    })
}

/// `m` radii `i/(m+1)`, `i = 1..=m`.
pub fn default_radius_grid(m: usize) -> Vec<f64> {
    (1..=m).map(|i| i as f64 / (m as f64 + 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::IndicialRoots;

    fn q(p: i64, r: i64) -> Rational {
        Rational::from_ratio(p, r)
    }

    fn x_series(k: u32, c: Rational) -> PolyhomSeries<Rational> {
        PolyhomSeries::monomial(Var::D, k, 1, 0, c).unwrap()
    }

    fn log1p_coeffs(k: u32, a: &Rational) -> PolyhomSeries<Rational> {
        // log(1 + a x) = Σ (−1)^{m−1} a^m x^m / m
        let mut s = PolyhomSeries::zero(Var::D, k);
        let mut pow = q(1, 1);
        for m in 1..=k as i64 {
            pow = &pow * a;
            let sign = if m % 2 == 1 { 1 } else { -1 };
            s.add_term(m as u32, 0, &pow * q(sign, m)).unwrap();
        }
        s
    }

    #[test]
    fn one_by_one_is_log_one_plus_x() {
        let k = 9;
        let m = vec![vec![x_series(k, q(1, 1))]];
        let got = logdet_series(&TracePowerInput::Matrix(m), k).unwrap();
        assert_eq!(got, log1p_coeffs(k, &q(1, 1)));
    }

    #[test]
    fn diagonal_two_by_two_is_sum_of_logs() {
        let k = 8;
        let (a, b) = (q(2, 3), q(-5, 2));
        let zero = PolyhomSeries::zero(Var::D, k);
        let m = vec![
            vec![x_series(k, a.clone()), zero.clone()],
            vec![zero, x_series(k, b.clone())],
        ];
        let got = logdet_series(&TracePowerInput::Matrix(m), k).unwrap();
        let want = log1p_coeffs(k, &a).add(&log1p_coeffs(k, &b)).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn matrix_and_trace_modes_agree() {
        let k = 7;
        let e = |c: &[(u32, i64, i64)]| {
            PolyhomSeries::from_terms(Var::D, k, c.iter().map(|(i, p, r)| ((*i, 0), q(*p, *r))))
                .unwrap()
        };
        let m = vec![
            vec![e(&[(1, 1, 2)]), e(&[(2, -1, 1)])],
            vec![e(&[(1, 3, 1), (3, 1, 1)]), e(&[(1, -2, 3)])],
        ];
        let mut taus = vec![];
        let mut pow = m.clone();
        for _ in 0..k {
            taus.push(matrix_trace(&pow).unwrap());
            pow = matrix_mul(&pow, &m).unwrap();
        }
        let a = logdet_series(&TracePowerInput::Matrix(m), k).unwrap();
        let b = logdet_series(&TracePowerInput::TracePowers(taus), k).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectral_radius_guard() {
        let big = vec![vec![PolyhomSeries::<f64>::constant(Var::D, 0, 0.7)]];
        assert!(matches!(
            logdet_series(&TracePowerInput::Matrix(big), 12),
            Err(FuchsianError::SpectralRadius { .. })
        ));
        let small = vec![vec![PolyhomSeries::<f64>::constant(Var::D, 0, 0.2)]];
        let v = logdet_series(&TracePowerInput::Matrix(small), 30).unwrap();
        assert!((v.coeff_or_zero(0, 0) - 1.2f64.ln()).abs() < 1e-15);
        let ragged = vec![vec![PolyhomSeries::<f64>::zero(Var::D, 2); 2]];
        assert_eq!(
            logdet_series(&TracePowerInput::Matrix(ragged), 3),
            Err(FuchsianError::NotSquare)
        );
    }

    #[test]
    fn assembled_roots() {
        let p = assemble_model::<Rational>(2, Form::D, ModelOptions::default()).unwrap();
        assert_eq!(p.indicial.roots, IndicialRoots::Rational(q(3, 1), q(-1, 1)));
        let p = assemble_model::<Rational>(2, Form::T, ModelOptions::default()).unwrap();
        assert_eq!(p.indicial.roots, IndicialRoots::Rational(q(6, 1), q(-2, 1)));
        let p = assemble_model::<Rational>(3, Form::D, ModelOptions::default()).unwrap();
        assert_eq!(p.indicial.roots, IndicialRoots::Rational(q(4, 1), q(-1, 1)));
        for n in 2..=6 {
            let p = assemble_model::<Rational>(n, Form::TDerived, ModelOptions::default()).unwrap();
            assert_eq!(
                p.indicial.roots,
                IndicialRoots::Rational(q(2 * n as i64 + 1, 1), q(-3, 1))
            );
        }
    }

    #[test]
    fn derived_t_form_matches_primal_resonance() {
        // v = t^{2n+2} solves the primal t-form; v₁ = v' − 2v/t = 2n t^{2n+1}
        // must then solve the derived operator.
        for n in 2..=5u32 {
            let derived =
                assemble_model::<Rational>(n, Form::TDerived, ModelOptions::default()).unwrap();
            let v1 = PolyhomSeries::monomial(Var::T, 20, 2 * n + 1, 0, q(2 * n as i64, 1)).unwrap();
            assert!(crate::fuchsian::apply_operator(&derived, &v1).unwrap().is_zero());
        }
    }

    #[test]
    fn t_form_is_four_times_substituted_d_form() {
        let n = 3;
        let d = assemble_model::<Rational>(n, Form::D, ModelOptions::default()).unwrap();
        let t = assemble_model::<Rational>(n, Form::T, ModelOptions::default()).unwrap();
        let v = PolyhomSeries::from_terms(
            Var::D,
            6,
            [((0, 0), q(1, 2)), ((2, 0), q(-3, 1)), ((5, 0), q(7, 5))],
        )
        .unwrap();
        let lhs = crate::fuchsian::apply_operator(&d, &v)
            .unwrap()
            .substitute_d_to_t()
            .unwrap()
            .scale(&q(4, 1));
        let rhs = crate::fuchsian::apply_operator(&t, &v.substitute_d_to_t().unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn model_nonlinearity_is_quadratic() {
        let prog = model_program::<Rational>(3, Form::D).unwrap();
        let k = 10;
        assert!(prog.evaluate(&PolyhomSeries::zero(Var::D, k)).unwrap().is_zero());
        // v of leading order 2 → F₂ starts at order 4
        let v = PolyhomSeries::from_terms(Var::D, k, [((2, 0), q(1, 1)), ((3, 0), q(2, 1))]).unwrap();
        let f = prog.evaluate(&v).unwrap();
        assert_eq!(f.residual_order(), 4);
        // leading coefficient: −(−(x₁² + 2 x₂²)/2) with x₁ = 2, x₂ = −2 → 4 · ... computed exactly:
        // X = diag(2, −2, −2) d², −(log det − tr) at order 4 = (4 + 4 + 4)/2 = 6
        assert_eq!(f.coeff(4, 0), Some(&q(6, 1)));
    }

    #[test]
    fn ball_examples() {
        let rep = ball_benchmark(2, 10, &[0.5]).unwrap();
        assert!(rep.max_pointwise_residual <= 1e-12);
        let exact = 0.75f64.powi(-3);
        assert!((ball_hessian_det(2, 0.5) - exact).abs() < 1e-12);
        assert!(rep.expansion_zero);
        assert_eq!(rep.c_n1_log, q(0, 1));

        for n in 2..=4 {
            let rep = ball_benchmark(n, n + 6, &default_radius_grid(20)).unwrap();
            assert!(rep.max_pointwise_residual <= 1e-12);
            assert_eq!(rep.expansion_coeff_max, q(0, 1));
            assert_eq!(rep.c_n1_log, q(0, 1));
            assert_eq!(rep.forcing_max, 0.0);
        }

        assert_eq!(ball_benchmark(2, 8, &[0.5, 1.0]), Err(CmaError::GridOutOfRange(1.0)));
        assert_eq!(ball_benchmark(2, 8, &[]), Err(CmaError::EmptyGrid));
    }

    #[test]
    fn first_log_coefficient_examples() {
        let forcing = PolyhomSeries::monomial(Var::D, 8, 3, 0, q(1, 1)).unwrap();
        let p = assemble_model(
            2,
            Form::D,
            ModelOptions {
                forcing: Some(forcing),
                ..ModelOptions::default()
            },
        )
        .unwrap();
        assert_eq!(first_log_coefficient(&p, 8).unwrap(), q(1, 4));

        let forcing =
            PolyhomSeries::from_terms(Var::D, 8, [((1, 0), q(1, 1)), ((4, 0), q(2, 1))]).unwrap();
        let p = assemble_model(
            2,
            Form::D,
            ModelOptions {
                forcing: Some(forcing),
                ..ModelOptions::default()
            },
        )
        .unwrap();
        assert_eq!(first_log_coefficient(&p, 8).unwrap(), q(0, 1));
    }
}
