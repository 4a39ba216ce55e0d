//! Indicial analysis and resonance-aware order-by-order solution of the
//! scalar model operator
//!
//! ```text
//! L[v] = x² v'' + a₁ x v' + a₀ v
//! ```
//!
//! with analytic perturbations `x·C₁·x²v'' + x·C_d·x v'`, a nonlinearity
//! program `F₂(v)` and a log-power forcing. The solver builds an expansion
//! `E` with `L[E] + perturbation − F₂(E) − forcing = O(x^{K+1})`.
//!
//! Writing `θ = x d/dx`, the linear part is `θ² + (a₁ − 1)θ + a₀`, so
//! `L[x^m] = P(m) x^m` with the indicial polynomial `P(s) = s² + (a₁ − 1)s + a₀`
//! and, on log terms,
//!
//! ```text
//! L[x^m (log x)^j] = P(m) x^m (log x)^j + j P'(m) x^m (log x)^{j−1}
//!                  + j(j−1) x^m (log x)^{j−2}.
//! ```
//!
//! The operator is lower triangular in `j` with diagonal `P(m)`. At a
//! resonant order (`P(m) = 0`) the plain coefficient is free and the
//! residual is absorbed one log-degree higher through `P'(m)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::FuchsianError;
use crate::ring::{rational_to_f64, Field, Rational, Ring};
use crate::series::{PolyhomSeries, Var};

/// Classification of the roots of the indicial polynomial.
#[derive(Clone, Debug, PartialEq)]
pub enum IndicialRoots {
    /// Two distinct rational roots, larger first.
    Rational(Rational, Rational),
    Double(Rational),
    /// Two distinct real irrational roots, larger first.
    Irrational(f64, f64),
    Complex { re: f64, im: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicialData {
    pub a1: Rational,
    pub a0: Rational,
    pub roots: IndicialRoots,
}

impl IndicialData {
    /// `P(s) = s² + (a₁ − 1)s + a₀`.
    pub fn p_at(&self, s: &Rational) -> Rational {
        s * s + (&self.a1 - Rational::from_i64(1)) * s + &self.a0
    }

    /// `P'(s) = 2s + a₁ − 1`.
    pub fn p_prime_at(&self, s: &Rational) -> Rational {
        Rational::from_i64(2) * s + &self.a1 - Rational::from_i64(1)
    }

    /// Nonnegative integer roots, in increasing order.
    pub fn integer_roots(&self) -> Vec<u32> {
        let candidates: Vec<&Rational> = match &self.roots {
            IndicialRoots::Rational(a, b) => vec![b, a],
            IndicialRoots::Double(a) => vec![a],
            _ => vec![],
        };
        candidates
            .into_iter()
            .filter(|r| r.is_integer() && !r.is_negative())
            .filter_map(|r| u32::try_from(r.to_integer()).ok())
            .collect()
    }

    /// Roots as floats, larger first (real part for complex pairs).
    pub fn roots_f64(&self) -> (f64, f64) {
        match &self.roots {
            IndicialRoots::Rational(a, b) => (rational_to_f64(a), rational_to_f64(b)),
            IndicialRoots::Double(a) => (rational_to_f64(a), rational_to_f64(a)),
            IndicialRoots::Irrational(a, b) => (*a, *b),
            IndicialRoots::Complex { re, .. } => (*re, *re),
        }
    }
}

/// Roots of `s(s − 1) + a₁ s + a₀`, classified exactly.
pub fn indicial(a1: Rational, a0: Rational) -> IndicialData {
    let b = &a1 - Rational::from_i64(1);
    let disc = &b * &b - Rational::from_i64(4) * &a0;
    let two = Rational::from_i64(2);
    let roots = if Zero::is_zero(&disc) {
        IndicialRoots::Double(-&b / &two)
    } else if disc.is_negative() {
        let re = -rational_to_f64(&b) / 2.0;
        let im = (-rational_to_f64(&disc)).sqrt() / 2.0;
        IndicialRoots::Complex { re, im }
    } else if let Some(root) = rational_sqrt(&disc) {
        IndicialRoots::Rational((-&b + &root) / &two, (-&b - &root) / &two)
    } else {
        let bf = rational_to_f64(&b);
        let sq = rational_to_f64(&disc).sqrt();
        IndicialRoots::Irrational((-bf + sq) / 2.0, (-bf - sq) / 2.0)
    };
    IndicialData { a1, a0, roots }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Index of a node in a [`Program`].
pub type NodeId = usize;

/// One step of a nonlinearity program. Operands refer to earlier nodes.
#[derive(Clone, Debug, PartialEq)]
pub enum Node<R: Ring> {
    /// The unknown `v`.
    Input,
    Constant(PolyhomSeries<R>),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, R),
    /// Multiply by `x^p`.
    Shift(NodeId, u32),
    Ddx(NodeId),
    /// `x d/dx`.
    Euler(NodeId),
    /// `Σ f_m a^m` with Taylor coefficients `f`.
    Compose { f: Vec<R>, arg: NodeId },
    /// `log det(I + X) − Tr X` for the matrix `X` of node entries (`None` = 0).
    LogDetHigher { matrix: Vec<Vec<Option<NodeId>>> },
}

/// A straight-line expression DAG evaluating `F₂(v)`. The last node is the output.
#[derive(Clone, Debug, PartialEq)]
pub struct Program<R: Ring> {
    nodes: Vec<Node<R>>,
}

impl<R: Ring> Default for Program<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Ring> Program<R> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    /// Appends a node and returns its id. Operands must already exist.
    pub fn push(&mut self, node: Node<R>) -> Result<NodeId, FuchsianError> {
        let id = self.nodes.len();
        let ok = |a: &NodeId| *a < id;
        let valid = match &node {
            Node::Input | Node::Constant(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => ok(a) && ok(b),
            Node::Scale(a, _) | Node::Shift(a, _) | Node::Ddx(a) | Node::Euler(a) => ok(a),
            Node::Compose { arg, .. } => ok(arg),
            Node::LogDetHigher { matrix } => {
                !matrix.is_empty()
                    && matrix.iter().all(|row| row.len() == matrix.len())
                    && matrix.iter().flatten().flatten().all(ok)
            }
        };
        if !valid {
            return Err(FuchsianError::InvalidProgram(format!(
                "node {id} refers to a later node or has a malformed matrix"
            )));
        }
        self.nodes.push(node);
        Ok(id)
    }

    pub fn nodes(&self) -> &[Node<R>] {
        &self.nodes
    }

    pub fn evaluate(&self, v: &PolyhomSeries<R>) -> Result<PolyhomSeries<R>, FuchsianError> {
        let mut vals: Vec<PolyhomSeries<R>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let out = match node {
                Node::Input => v.clone(),
                Node::Constant(c) => c.clone(),
                Node::Add(a, b) => vals[*a].add(&vals[*b])?,
                Node::Sub(a, b) => vals[*a].sub(&vals[*b])?,
                Node::Mul(a, b) => vals[*a].mul(&vals[*b])?,
                Node::Scale(a, c) => vals[*a].scale(c),
                Node::Shift(a, p) => vals[*a].shift(*p),
                Node::Ddx(a) => vals[*a].ddx()?,
                Node::Euler(a) => vals[*a].euler(),
                Node::Compose { f, arg } => PolyhomSeries::compose_analytic(f, &vals[*arg])?,
                Node::LogDetHigher { matrix } => {
                    let zero = PolyhomSeries::zero(v.var(), v.trunc());
                    let m: Vec<Vec<PolyhomSeries<R>>> = matrix
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|e| e.map_or_else(|| zero.clone(), |id| vals[id].clone()))
                                .collect()
                        })
                        .collect();
                    let k = m
                        .iter()
                        .flatten()
                        .map(PolyhomSeries::trunc)
                        .min()
                        .unwrap_or(0);
                    let trace = crate::cma::matrix_trace(&m)?;
                    let full =
                        crate::cma::logdet_series(&crate::cma::TracePowerInput::Matrix(m), k)?;
                    full.sub(&trace)?
                }
            };
            vals.push(out);
        }
        vals.pop()
            .ok_or_else(|| FuchsianError::InvalidProgram("empty program".into()))
    }
}

/// Scalar model problem `L[v] + x·C₁·x²v'' + x·C_d·x v' = forcing + F₂(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuchsianProblem<R: Ring> {
    /// Complex dimension of the underlying Monge-Ampère problem.
    pub n: u32,
    pub var: Var,
    pub indicial: IndicialData,
    pub c1: Option<PolyhomSeries<R>>,
    pub cd: Option<PolyhomSeries<R>>,
    pub forcing: Option<PolyhomSeries<R>>,
    pub nonlinearity: Option<Program<R>>,
    /// Nonlocal coefficients at resonant orders; missing orders default to 0.
    pub free: BTreeMap<u32, R>,
}

impl<R: Field> FuchsianProblem<R> {
    /// Pure linear problem with the given leading coefficients.
    pub fn linear(n: u32, var: Var, a1: Rational, a0: Rational) -> Result<Self, FuchsianError> {
        if n < 2 {
            return Err(FuchsianError::InvalidDimension(n));
        }
        Ok(Self {
            n,
            var,
            indicial: indicial(a1, a0),
            c1: None,
            cd: None,
            forcing: None,
            nonlinearity: None,
            free: BTreeMap::new(),
        })
    }

    pub fn with_forcing(mut self, forcing: PolyhomSeries<R>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Sets the smooth perturbation coefficients `C₁`, `C_d`.
    pub fn with_perturbation(
        mut self,
        c1: Option<PolyhomSeries<R>>,
        cd: Option<PolyhomSeries<R>>,
    ) -> Result<Self, FuchsianError> {
        for c in c1.iter().chain(cd.iter()) {
            if c.terms().any(|((_, j), _)| j > 0) {
                return Err(FuchsianError::LogInPerturbation);
            }
        }
        self.c1 = c1;
        self.cd = cd;
        Ok(self)
    }

    pub fn with_nonlinearity(mut self, program: Program<R>) -> Self {
        self.nonlinearity = Some(program);
        self
    }

    pub fn with_free(mut self, order: u32, value: R) -> Self {
        self.free.insert(order, value);
        self
    }

    /// The smallest nonnegative resonant order, where the first log can appear.
    pub fn first_resonance(&self) -> Option<u32> {
        self.indicial.integer_roots().into_iter().next()
    }

    fn linear_part(&self, v: &PolyhomSeries<R>) -> Result<PolyhomSeries<R>, FuchsianError> {
        let one = Rational::from_i64(1);
        let th = v.euler();
        let th2 = th.euler();
        let b = R::from_rational(&(&self.indicial.a1 - one));
        let a0 = R::from_rational(&self.indicial.a0);
        Ok(th2.add(&th.scale(&b))?.add(&v.scale(&a0))?)
    }

    fn perturbation(&self, v: &PolyhomSeries<R>) -> Result<PolyhomSeries<R>, FuchsianError> {
        let th = v.euler();
        let mut out = PolyhomSeries::zero(v.var(), v.trunc());
        if let Some(c1) = &self.c1 {
            // x³v'' = x·(θ² − θ)v
            let second = th.euler().sub(&th)?;
            out = out.add(&c1.mul(&second)?.shift(1))?;
        }
        if let Some(cd) = &self.cd {
            out = out.add(&cd.mul(&th)?.shift(1))?;
        }
        Ok(out)
    }
}

/// Residual `L[v] + perturbation(v) − F₂(v) − forcing`.
pub fn apply_operator<R: Field>(
    p: &FuchsianProblem<R>,
    v: &PolyhomSeries<R>,
) -> Result<PolyhomSeries<R>, FuchsianError> {
    let mut out = p.linear_part(v)?.add(&p.perturbation(v)?)?;
    if let Some(prog) = &p.nonlinearity {
        out = out.sub(&prog.evaluate(v)?)?;
    }
    if let Some(f) = &p.forcing {
        out = out.sub(f)?;
    }
    Ok(out)
}

/// Output of [`solve_polyhom`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionResult<R: Ring> {
    pub expansion: PolyhomSeries<R>,
    /// First power carrying a log term.
    pub log_birth_order: Option<u32>,
    /// `N_i` for every power present in the expansion.
    pub log_degrees: BTreeMap<u32, u32>,
    pub residual_order: u32,
}

/// Builds the expansion through order `k`, taking resonant plain
/// coefficients from `free` (default 0).
pub fn solve_polyhom<R: Field>(
    p: &FuchsianProblem<R>,
    k: u32,
    free: &BTreeMap<u32, R>,
) -> Result<ExpansionResult<R>, FuchsianError> {
    if k < p.n + 1 {
        return Err(FuchsianError::TruncationTooLow { k, min: p.n + 1 });
    }
    let needs = |s: &Option<PolyhomSeries<R>>, extra: u32| match s {
        Some(s) if s.trunc() + extra < k => Err(FuchsianError::TruncationTooLow {
            k: s.trunc() + extra,
            min: k,
        }),
        _ => Ok(()),
    };
    needs(&p.forcing, 0)?;
    needs(&p.c1, 1)?;
    needs(&p.cd, 1)?;
    if let Some(prog) = &p.nonlinearity {
        if !prog.evaluate(&PolyhomSeries::zero(p.var, k))?.is_zero() {
            return Err(FuchsianError::NonlinearityNotVanishing);
        }
    }

    let mut e = PolyhomSeries::zero(p.var, k);
    for m in 0..=k {
        let residual = apply_operator(p, &e)?;
        if residual.residual_order() < m {
            return Err(FuchsianError::NonlinearityNotHigherOrder {
                order: residual.residual_order(),
            });
        }
        let r: BTreeMap<u32, R> = residual.terms_at(m).map(|(j, c)| (j, c.clone())).collect();
        let mq = Rational::from_i64(m as i64);
        let pm = p.indicial.p_at(&mq);
        let dp = R::from_rational(&p.indicial.p_prime_at(&mq));
        let top = r.keys().next_back().copied();
        let r_at = |j: u32| r.get(&j).cloned().unwrap_or_else(R::zero);

        let mut x: BTreeMap<u32, R> = BTreeMap::new();
        let x_at = |x: &BTreeMap<u32, R>, j: u32| x.get(&j).cloned().unwrap_or_else(R::zero);
        if !Zero::is_zero(&pm) {
            let pm = R::from_rational(&pm);
            if let Some(top) = top {
                for j in (0..=top).rev() {
                    let rhs = r_at(j)
                        .add(&dp.mul(&x_at(&x, j + 1)).scale_i64(j as i64 + 1))
                        .add(&x_at(&x, j + 2).scale_i64((j as i64 + 2) * (j as i64 + 1)))
                        .neg();
                    x.insert(j, rhs.div(&pm).expect("P(m) is nonzero"));
                }
            }
        } else {
            if dp.is_zero() {
                return Err(FuchsianError::DoubleRoot { order: m });
            }
            if let Some(top) = top {
                for j in (0..=top).rev() {
                    let rhs = r_at(j)
                        .add(&x_at(&x, j + 2).scale_i64((j as i64 + 2) * (j as i64 + 1)))
                        .neg();
                    let denom = dp.scale_i64(j as i64 + 1);
                    x.insert(j + 1, rhs.div(&denom).expect("P'(m) is nonzero"));
                }
            }
            x.insert(0, free.get(&m).cloned().unwrap_or_else(R::zero));
        }
        for (j, c) in x {
            if m == 0 && j > 0 && !c.is_zero() {
                return Err(FuchsianError::LogAtOrderZero);
            }
            e.add_term(m, j, c)?;
        }
    }

    let residual_order = apply_operator(p, &e)?.residual_order();
    if residual_order <= k {
        return Err(FuchsianError::NonlinearityNotHigherOrder {
            order: residual_order,
        });
    }
    let log_degrees = e.log_degrees();
    let log_birth_order = log_degrees
        .iter()
        .find(|(_, n)| **n >= 1)
        .map(|(i, _)| *i);
    Ok(ExpansionResult {
        expansion: e,
        log_birth_order,
        log_degrees,
        residual_order,
    })
}

/// `residual_order(apply_operator(p, E))` with `E` truncated at `k`.
pub fn verify_expansion<R: Field>(
    p: &FuchsianProblem<R>,
    e: &PolyhomSeries<R>,
    k: u32,
) -> Result<u32, FuchsianError> {
    Ok(apply_operator(p, &e.truncate(k))?.residual_order())
}
