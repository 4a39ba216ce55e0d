//! `polyhom` command line: `expand`, `ball`, `cex`, `diagnose`, `oracle`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bivariate::BivariatePoly;
use crate::cma::{assemble_model, ball_benchmark, default_radius_grid, Form, ModelOptions};
use crate::config::{form_name, parse_form, ProblemConfig};
use crate::counterexample::{
    build_cex_series, cex_residual, growth_ledger, ledger_csv, random_seed, CexState, LedgerMode,
};
use crate::diagnostics::{gevrey_fit_logs, log_points, GrowthThresholds};
use crate::error::{
    CexError, CmaError, ConfigError, DiagnosticsError, FuchsianError, OracleError, SeriesError,
};
use crate::fmt_f64;
use crate::fuchsian::{solve_polyhom, verify_expansion};
use crate::oracle::{fit_coefficients, solve_bvp, GridSolution};
use crate::ring::{format_rational, parse_rational, rational_to_f64, Rational, Ring};
use crate::series::{PolyhomSeries, Var};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

fn invalid(e: impl Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn numeric(e: impl Display) -> CliError {
    CliError::Numeric(e.to_string())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        invalid(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        invalid(e)
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        invalid(e)
    }
}

impl From<FuchsianError> for CliError {
    fn from(e: FuchsianError) -> Self {
        match e {
            FuchsianError::InvalidDimension(_)
            | FuchsianError::TruncationTooLow { .. }
            | FuchsianError::LogInPerturbation
            | FuchsianError::InvalidProgram(_)
            | FuchsianError::Series(_) => invalid(e),
            _ => numeric(e),
        }
    }
}

impl From<CmaError> for CliError {
    fn from(e: CmaError) -> Self {
        match e {
            CmaError::Fuchsian(inner) => inner.into(),
            CmaError::Series(inner) => inner.into(),
            CmaError::GridOutOfRange(_) | CmaError::EmptyGrid => invalid(e),
        }
    }
}

impl From<CexError> for CliError {
    fn from(e: CexError) -> Self {
        match e {
            CexError::KmaxTooLarge { .. } | CexError::InvalidBound(_) | CexError::Series(_) => {
                invalid(e)
            }
            CexError::DivisionByD { .. } | CexError::MissingFactor { .. } => numeric(e),
        }
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::InvalidNorm => invalid(e),
            DiagnosticsError::TooFewPoints { .. } => numeric(e),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidGrid(_) | OracleError::BasisSize { .. } => invalid(e),
            OracleError::Singular { .. } | OracleError::IllConditioned { .. } => numeric(e),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "polyhom", version, about = "Polyhomogeneous boundary expansions and growth diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a model problem order by order and write the expansion.
    Expand(ExpandArgs),
    /// Check the unit-ball solution and its expansion.
    Ball(BallArgs),
    /// Build the divergent counterexample series and its growth ledger.
    Cex(CexArgs),
    /// Classify the growth of a coefficient sequence.
    Diagnose(DiagnoseArgs),
    /// Solve the linear t-form ODE by finite differences and fit coefficients.
    Oracle(OracleArgs),
}

#[derive(clap::Args, Debug)]
struct ExpandArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long = "K")]
    k: Option<u32>,
    /// d | t | t-derived
    #[arg(long)]
    form: Option<String>,
    /// Comma-separated `i:c` or `i.j:c` terms of the forcing.
    #[arg(long)]
    forcing: Option<String>,
    /// Comma-separated `m=c` values for resonant coefficients.
    #[arg(long)]
    free: Vec<String>,
    /// none | model
    #[arg(long)]
    nonlinearity: Option<String>,
    /// key=value problem file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value override, applied last.
    #[arg(long = "set")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(clap::Args, Debug)]
struct BallArgs {
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long = "K", default_value_t = 10)]
    k: u32,
    /// Radii i/(points+1), i = 1..=points.
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LedgerArg {
    /// ln max |coefficient| of each a_k for the chosen seed.
    Seed,
    /// ln |a_k| at the origin for the seed with coefficients at the bound C.
    Saturating,
    /// Upper bound on ln max |coefficient| propagated through the recursion.
    Symbolic,
}

#[derive(clap::Args, Debug)]
struct CexArgs {
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Comma-separated `monomial:coef`, e.g. `d^2*t:1/2,1:3`.
    #[arg(long)]
    seed_poly: Option<String>,
    /// Use a random seed of this total degree instead.
    #[arg(long)]
    random_degree: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = LedgerArg::Seed)]
    ledger_mode: LedgerArg,
    #[arg(long, default_value_t = 1.0)]
    bound_c: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(clap::Args, Debug)]
struct DiagnoseArgs {
    /// CSV `k,value`, expansion JSON, or counterexample JSON. Without it the
    /// symbolic counterexample bound for n=2, C=1, kmax=12 is used.
    /// Counterexample coefficients are indexed by s-derivative order 2k.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    sigma_threshold: Option<f64>,
    #[arg(long)]
    residual_threshold: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OraclePreset {
    /// Manufactured solution t^power.
    Power,
    /// Forcing t² + t⁴ + t⁶, compared with the expansion.
    Expansion,
}

#[derive(clap::Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum, default_value_t = OraclePreset::Power)]
    preset: OraclePreset,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 4)]
    power: u32,
    #[arg(long, default_value_t = 128)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    t0: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long = "K", default_value_t = 10)]
    k: u32,
    /// Comma-separated `i.j` basis exponents.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Expand(a) => expand(a),
        Command::Ball(a) => ball(a),
        Command::Cex(a) => cex(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

type Terms = Vec<((u32, u32), Rational)>;

/// `i:c` or `i.j:c` entries.
pub fn parse_terms(s: &str) -> Result<Terms, CliError> {
    split_list(s)
        .map(|entry| {
            let bad = || invalid(format!("bad term {entry:?}, expected i:c or i.j:c"));
            let (idx, c) = entry.split_once(':').ok_or_else(bad)?;
            let (i, j) = idx.split_once('.').unwrap_or((idx, "0"));
            let i = i.trim().parse().map_err(|_| bad())?;
            let j = j.trim().parse().map_err(|_| bad())?;
            Ok(((i, j), parse_rational(c)?))
        })
        .collect()
}

/// `monomial:coef` entries with monomials like `1`, `d`, `t^2`, `d^3*t`.
pub fn parse_seed_poly(s: &str) -> Result<BivariatePoly<Rational>, CliError> {
    let mut poly = BivariatePoly::zero_poly();
    for entry in split_list(s) {
        let bad = || invalid(format!("bad seed term {entry:?}, expected monomial:coef"));
        let (mono, c) = entry.split_once(':').ok_or_else(bad)?;
        let (mut p, mut q) = (0u32, 0u32);
        for factor in mono.split('*').map(str::trim) {
            let (base, exp) = factor.split_once('^').unwrap_or((factor, "1"));
            let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
            match base.trim() {
                "1" => {}
                "d" => p += exp,
                "t" => q += exp,
                _ => return Err(bad()),
            }
        }
        poly.add_term(p, q, parse_rational(c)?);
    }
    Ok(poly)
}

fn expansion_problem(a: &ExpandArgs) -> Result<ProblemConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => ProblemConfig::parse(&fs::read_to_string(path)?)?,
        None => ProblemConfig::default(),
    };
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(f) = &a.form {
        cfg.form = parse_form(f).ok_or_else(|| invalid(format!("unknown form {f:?}")))?;
    }
    if let Some(nl) = &a.nonlinearity {
        cfg.set("nonlinearity", nl)?;
    }
    match (&a.forcing, &a.config) {
        (Some(f), _) => cfg.forcing = parse_terms(f)?.into_iter().collect(),
        (None, None) => {
            cfg.forcing.insert((3, 0), Rational::from_i64(1));
        }
        (None, Some(_)) => {}
    }
    for entry in a.free.iter().flat_map(|s| split_list(s)) {
        let (m, v) = entry
            .split_once('=')
            .ok_or_else(|| invalid(format!("bad free value {entry:?}, expected m=c")))?;
        cfg.set(&format!("free.{}", m.trim()), v.trim())?;
    }
    for kv in &a.overrides {
        cfg.apply_override(kv)?;
    }
    Ok(cfg)
}

fn norms_csv(norms: &[(u32, f64)], header: &str) -> String {
    let mut s = format!("k,{header}\n");
    for (k, v) in norms {
        s.push_str(&format!("{k},{}\n", fmt_f64(*v)));
    }
    s
}

fn series_norms(series: &PolyhomSeries<Rational>) -> Vec<(u32, f64)> {
    series
        .coefficient_norms()
        .into_iter()
        .enumerate()
        .map(|(k, v)| (k as u32, v))
        .collect()
}

fn expand(a: ExpandArgs) -> Result<(), CliError> {
    let cfg = expansion_problem(&a)?;
    let problem = cfg.to_problem()?;
    let res = solve_polyhom(&problem, cfg.k, &problem.free)?;
    let verified = verify_expansion(&problem, &res.expansion, cfg.k)?;
    let log_degrees: Vec<Value> = res
        .log_degrees
        .iter()
        .map(|(i, n)| json!({"i": i, "N": n}))
        .collect();
    let report = json!({
        "n": cfg.n,
        "K": cfg.k,
        "form": form_name(cfg.form),
        "nonlinearity": if cfg.nonlinear { "model" } else { "none" },
        "series": res.expansion.to_json(),
        "log_birth_order": res.log_birth_order,
        "log_degrees": log_degrees,
        "residual_order": res.residual_order,
        "verified_order": verified,
    });
    write(&a.out, "expansion.json", &pretty(&report))?;

    let mut table = String::from("i,j,coefficient\n");
    for ((i, j), c) in res.expansion.terms() {
        table.push_str(&format!("{i},{j},{}\n", format_rational(c)));
    }
    write(&a.out, "expansion.csv", &table)?;
    write(&a.out, "norms.csv", &norms_csv(&series_norms(&res.expansion), "norm"))?;

    println!("expansion: n={} K={} form={} terms={}", cfg.n, cfg.k, form_name(cfg.form), res.expansion.len());
    match res.log_birth_order {
        Some(i) => println!("first log term at order {i}"),
        None => println!("no log terms"),
    }
    println!("residual vanishes below order {verified}");
    Ok(())
}

fn ball(a: BallArgs) -> Result<(), CliError> {
    let report = ball_benchmark(a.n, a.k, &default_radius_grid(a.points))?;
    write(&a.out, "ball_report.json", &pretty(&report.to_json()))?;
    println!(
        "ball: n={} K={} max relative residual {} expansion_zero={} c_{{n+1,1}}={}",
        a.n,
        a.k,
        fmt_f64(report.max_pointwise_residual),
        report.expansion_zero,
        format_rational(&report.c_n1_log)
    );
    Ok(())
}

fn cex(a: CexArgs) -> Result<(), CliError> {
    let seed = match (a.random_degree, &a.seed_poly) {
        (Some(deg), _) => random_seed(deg, &mut ChaCha8Rng::seed_from_u64(a.seed)),
        (None, Some(s)) => parse_seed_poly(s)?,
        (None, None) => parse_seed_poly("d:1")?,
    };
    let state = build_cex_series(a.n, &seed, a.kmax)?;
    let residual = cex_residual(&state);
    let first_nonzero = residual.iter().position(|r| !r.is_zero_poly());
    let vanishes_below_top = first_nonzero.is_none_or(|k| k >= a.kmax);
    let terminates = state.a.last().is_some_and(BivariatePoly::is_zero_poly);

    let mut report = state.to_json();
    report["residual"] = json!({
        "first_nonzero_order": first_nonzero,
        "vanishes_below_truncation": vanishes_below_top,
        "terminates": terminates,
        "divisible_by_d_pow_n1": state.a.iter().all(|p| p.divisible_by_d(a.n + 1)),
    });
    write(&a.out, "cex.json", &pretty(&report))?;

    let ledger = match a.ledger_mode {
        LedgerArg::Seed => state.log_max_coefficients(),
        LedgerArg::Saturating => growth_ledger(a.n, a.bound_c, a.kmax, LedgerMode::SaturatingSeed)?,
        LedgerArg::Symbolic => growth_ledger(a.n, a.bound_c, a.kmax, LedgerMode::SymbolicBound)?,
    };
    write(&a.out, "ledger.csv", &ledger_csv(&ledger))?;

    println!(
        "cex: n={} kmax={} terms={} residual zero below truncation: {} terminates: {}",
        a.n,
        a.kmax,
        state.a.iter().map(BivariatePoly::len).sum::<usize>(),
        vanishes_below_top,
        terminates
    );
    Ok(())
}

/// A sequence read for diagnosis, either as norms or as their logs.
enum Sequence {
    Norms(Vec<(u32, f64)>),
    Logs(Vec<(u32, f64)>),
}

fn read_csv(text: &str) -> Result<Sequence, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| invalid("empty CSV input"))?;
    let logs = header.to_ascii_lowercase().contains("log");
    let mut pts = Vec::new();
    for line in lines {
        let bad = || invalid(format!("bad CSV row {line:?}, expected k,value"));
        let (k, v) = line.split_once(',').ok_or_else(bad)?;
        let k: u32 = k.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        pts.push((k, v));
    }
    Ok(if logs { Sequence::Logs(pts) } else { Sequence::Norms(pts) })
}

fn read_json(text: &str) -> Result<(Sequence, &'static str), CliError> {
    let v: Value = serde_json::from_str(text).map_err(invalid)?;
    if let Some(series) = v.get("series") {
        let s = PolyhomSeries::<Rational>::from_json(series)?;
        return Ok((Sequence::Norms(series_norms(&s)), "expansion"));
    }
    if v.get("a").is_some() {
        let state = CexState::from_json(&v)?;
        return Ok((Sequence::Logs(s_derivative_points(&state.log_max_coefficients())), "counterexample"));
    }
    let s = PolyhomSeries::<Rational>::from_json(&v)?;
    Ok((Sequence::Norms(series_norms(&s)), "series"))
}

/// `a_k` is the `2k`-th `s`-derivative of the counterexample at `s = 0`, so
/// its Gevrey order in `s` is fitted against `p = 2k`.
fn s_derivative_points(logs: &[f64]) -> Vec<(u32, f64)> {
    logs.iter().enumerate().map(|(k, l)| (2 * k as u32, *l)).collect()
}

fn diagnose(a: DiagnoseArgs) -> Result<(), CliError> {
    let (seq, source) = match &a.input {
        None => {
            let logs = growth_ledger(2, 1.0, 12, LedgerMode::SymbolicBound)?;
            (Sequence::Logs(s_derivative_points(&logs)), "counterexample-bound")
        }
        Some(path) => {
            let text = fs::read_to_string(path)?;
            if path.extension().is_some_and(|e| e == "csv") {
                (read_csv(&text)?, "csv")
            } else {
                read_json(&text)?
            }
        }
    };
    let mut th = GrowthThresholds::default();
    if let Some(s) = a.sigma_threshold {
        th.convergent_sigma = s;
    }
    if let Some(r) = a.residual_threshold {
        th.fit_residual = r;
    }
    let (logs, csv) = match &seq {
        Sequence::Norms(p) => (log_points(p), norms_csv(p, "norm")),
        Sequence::Logs(p) => (p.clone(), norms_csv(p, "log_norm")),
    };
    write(&a.out, "norms.csv", &csv)?;
    let fit = gevrey_fit_logs(&logs, &th)?;
    let mut report = fit.to_json();
    report["source"] = json!(source);
    report["points"] = json!(logs.len());
    write(&a.out, "growth_fit.json", &pretty(&report))?;
    println!(
        "diagnose ({source}): {} sigma={} radius={}",
        report["classification"].as_str().unwrap_or("?"),
        fmt_f64(fit.gevrey_order),
        fit.radius_estimate.map_or("none".to_string(), fmt_f64)
    );
    Ok(())
}

fn parse_basis(s: &str) -> Result<Vec<(u32, u32)>, CliError> {
    split_list(s)
        .map(|e| {
            let bad = || invalid(format!("bad basis entry {e:?}, expected i.j"));
            let (i, j) = e.split_once('.').unwrap_or((e, "0"));
            Ok((i.parse().map_err(|_| bad())?, j.parse().map_err(|_| bad())?))
        })
        .collect()
}

/// `P_t(s) = s(s−1) − (2n−1)s − 4(n+1)` evaluated in floating point.
fn t_indicial(n: u32, s: f64) -> f64 {
    let n = n as f64;
    s * (s - 1.0) - (2.0 * n - 1.0) * s - 4.0 * (n + 1.0)
}

/// Expansion of `L_t v = t² + t⁴ + t⁶` through order `k`, evaluated in `f64`.
pub fn polynomial_forcing_expansion(n: u32, k: u32) -> Result<PolyhomSeries<f64>, CliError> {
    let forcing = PolyhomSeries::from_terms(
        Var::T,
        k,
        [2u32, 4, 6].map(|i| ((i, 0), Rational::from_i64(1))),
    )?;
    let problem = assemble_model(
        n,
        Form::T,
        ModelOptions {
            forcing: Some(forcing),
            ..ModelOptions::default()
        },
    )?;
    let res = solve_polyhom(&problem, k, &problem.free)?;
    Ok(res.expansion.map_coeffs(rational_to_f64))
}

fn oracle(a: OracleArgs) -> Result<(), CliError> {
    let (sol, max_error, default_basis): (GridSolution, f64, Vec<(u32, u32)>) = match a.preset {
        OraclePreset::Power => {
            let p = a.power as i32;
            let c = t_indicial(a.n, a.power as f64);
            let exact = move |t: f64| t.powi(p);
            let f = move |t: f64| c * t.powi(p - 2);
            let sol = solve_bvp(a.n, &f, a.t0, a.t_end, a.m, (exact(a.t0), exact(a.t_end)))?;
            let err = sol.max_error(exact);
            (sol, err, vec![(a.power, 0)])
        }
        OraclePreset::Expansion => {
            let e = polynomial_forcing_expansion(a.n, a.k)?;
            let ev = |t: f64| e.eval_f64(t).unwrap_or(f64::NAN);
            let f = |t: f64| 1.0 + t * t + t.powi(4);
            let sol = solve_bvp(a.n, &f, a.t0, a.t_end, a.m, (ev(a.t0), ev(a.t_end)))?;
            let err = sol.max_error(ev);
            let basis = e.terms().map(|(ij, _)| ij).take(6).collect();
            (sol, err, basis)
        }
    };
    let basis = match &a.basis {
        Some(b) => parse_basis(b)?,
        None => default_basis,
    };
    let fit = fit_coefficients(&sol, &basis)?;
    write(&a.out, "solution.csv", &sol.to_csv())?;
    let report = json!({
        "preset": format!("{:?}", a.preset).to_lowercase(),
        "n": a.n,
        "m": a.m,
        "t0": a.t0,
        "T": a.t_end,
        "h": sol.h(),
        "max_error": max_error,
        "fit": fit.to_json(),
    });
    write(&a.out, "fit.json", &pretty(&report))?;
    println!(
        "oracle: n={} m={} h={} max error {}",
        a.n,
        a.m,
        fmt_f64(sol.h()),
        fmt_f64(max_error)
    );
    Ok(())
}
