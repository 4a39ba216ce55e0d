//! C ABI for `polyhom`.
//!
//! Objects are opaque handles written through an out-pointer and released
//! with the matching `ph_*_free`. Every fallible call returns a
//! [`PhStatus`]; on failure [`ph_last_error`] describes the problem. Strings
//! returned through `char **` are owned by the caller and released with
//! [`ph_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use polyhom::cli::{parse_seed_poly, CliError, EXIT_INVALID};
use polyhom::cma::{ball_benchmark, default_radius_grid, logdet_series, Form, TracePowerInput};
use polyhom::config::ProblemConfig;
use polyhom::counterexample::{build_cex_series, cex_residual, CexState};
use polyhom::diagnostics::{gevrey_fit, radius_estimate, Classification, GrowthThresholds};
use polyhom::fuchsian::{solve_polyhom, ExpansionResult};
use polyhom::ring::{format_rational, parse_rational, rational_to_f64};
use polyhom::{
    CexError, CmaError, ConfigError, DiagnosticsError, FuchsianError, PolyhomSeries, Rational,
    SeriesError, Var,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// Invalid input (bad dimension, parse error, out-of-range parameter).
    Invalid = 2,
    /// The computation itself failed (resonance, ill-conditioning, ...).
    Numeric = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhForm {
    D = 0,
    T = 1,
    TDerived = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhClassification {
    Convergent = 0,
    Gevrey = 1,
    Unknown = 2,
}

/// Growth fit of a coefficient-norm sequence.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhGrowthFit {
    /// Estimated radius; meaningful only when `has_radius` is true. May be +inf.
    pub radius: f64,
    pub has_radius: bool,
    pub gevrey_order: f64,
    pub fit_residual: f64,
    pub classification: PhClassification,
}

/// Model problem under construction.
pub struct PhProblem {
    cfg: ProblemConfig,
}

/// Solved expansion with exact rational coefficients.
pub struct PhExpansion {
    result: ExpansionResult<Rational>,
}

/// Counterexample coefficients `a_0..=a_kmax`.
pub struct PhCexState {
    state: CexState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(PhStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = if e.exit_code() == EXIT_INVALID {
            PhStatus::Invalid
        } else {
            PhStatus::Numeric
        };
        Failure(status, e.to_string())
    }
}

macro_rules! via_cli {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                CliError::from(e).into()
            }
        }
    )*};
}

via_cli!(CexError, CmaError, ConfigError, DiagnosticsError, FuchsianError, SeriesError);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PhStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside polyhom");
            PhStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PhStatus::Null, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PhStatus::Invalid, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| invalid("string contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `ph_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ph_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ph_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Model problem of dimension `n` with zero forcing and `K = 8`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_model(
    n: u32,
    form: PhForm,
    nonlinear: bool,
    out: *mut *mut PhProblem,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg = ProblemConfig {
            n,
            form: match form {
                PhForm::D => Form::D,
                PhForm::T => Form::T,
                PhForm::TDerived => Form::TDerived,
            },
            nonlinear,
            ..ProblemConfig::default()
        };
        *out = Box::into_raw(Box::new(PhProblem { cfg }));
        Ok(())
    })
}

/// Problem from `key=value` configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_from_config(
    text: *const c_char,
    out: *mut *mut PhProblem,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg = ProblemConfig::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(PhProblem { cfg }));
        Ok(())
    })
}

/// Applies one configuration entry, e.g. `key = "forcing.3.0"`, `value = "1/2"`.
///
/// # Safety
/// `p` must be a live problem handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_set(
    p: *mut PhProblem,
    key: *const c_char,
    value: *const c_char,
) -> PhStatus {
    guard(|| {
        let p = handle_mut(p, "problem")?;
        p.cfg.set(str_arg(key, "key")?, str_arg(value, "value")?)?;
        Ok(())
    })
}

/// Adds `coeff · x^i (log x)^j` to the forcing. `coeff` is `p/q` or a decimal.
///
/// # Safety
/// `p` must be a live problem handle; `coeff` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_add_forcing(
    p: *mut PhProblem,
    i: u32,
    j: u32,
    coeff: *const c_char,
) -> PhStatus {
    guard(|| {
        let p = handle_mut(p, "problem")?;
        let c = parse_rational(str_arg(coeff, "coeff")?)?;
        let entry = p.cfg.forcing.entry((i, j)).or_default();
        *entry += c;
        Ok(())
    })
}

/// Sets the plain coefficient at resonant order `m`.
///
/// # Safety
/// `p` must be a live problem handle; `value` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_set_free(
    p: *mut PhProblem,
    m: u32,
    value: *const c_char,
) -> PhStatus {
    guard(|| {
        let p = handle_mut(p, "problem")?;
        p.cfg.free.insert(m, parse_rational(str_arg(value, "value")?)?);
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ph_problem_free(p: *mut PhProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Solves through order `k`; `k = 0` uses the problem's configured `K`.
///
/// # Safety
/// `p` must be a live problem handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_solve(p: *const PhProblem, k: u32, out: *mut *mut PhExpansion) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let p = handle(p, "problem")?;
        let mut cfg = p.cfg.clone();
        if k > 0 {
            cfg.k = k;
        }
        let problem = cfg.to_problem()?;
        let result = solve_polyhom(&problem, cfg.k, &problem.free)?;
        *out = Box::into_raw(Box::new(PhExpansion { result }));
        Ok(())
    })
}

/// Expansion in the JSON series format.
///
/// # Safety
/// `e` must be a live expansion handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_json(e: *const PhExpansion, out: *mut *mut c_char) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = handle(e, "expansion")?;
        out_string(out, e.result.expansion.to_json().to_string())
    })
}

/// Exact coefficient of `x^i (log x)^j` as `p/q` text.
///
/// # Safety
/// `e` must be a live expansion handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_coeff(
    e: *const PhExpansion,
    i: u32,
    j: u32,
    out: *mut *mut c_char,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = handle(e, "expansion")?;
        out_string(out, format_rational(&e.result.expansion.coeff_or_zero(i, j)))
    })
}

/// Nearest double to the coefficient of `x^i (log x)^j`.
///
/// # Safety
/// `e` must be a live expansion handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_coeff_f64(
    e: *const PhExpansion,
    i: u32,
    j: u32,
    out: *mut f64,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = handle(e, "expansion")?;
        *out = rational_to_f64(&e.result.expansion.coeff_or_zero(i, j));
        Ok(())
    })
}

/// First order carrying a log term; `*has_log` is false when there is none.
///
/// # Safety
/// `e` must be a live expansion handle; `order` and `has_log` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_log_birth(
    e: *const PhExpansion,
    order: *mut u32,
    has_log: *mut bool,
) -> PhStatus {
    guard(|| {
        check_out(order, "order")?;
        check_out(has_log, "has_log")?;
        let e = handle(e, "expansion")?;
        *has_log = e.result.log_birth_order.is_some();
        *order = e.result.log_birth_order.unwrap_or(0);
        Ok(())
    })
}

/// Lowest order at which the residual is nonzero.
///
/// # Safety
/// `e` must be a live expansion handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_residual_order(e: *const PhExpansion, out: *mut u32) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = handle(e, "expansion")?.result.residual_order;
        Ok(())
    })
}

/// # Safety
/// `e` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ph_expansion_free(e: *mut PhExpansion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Counterexample series from a seed such as `"d:1,d^2*t:1/2"`.
///
/// # Safety
/// `seed_poly` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_cex_build(
    n: u32,
    seed_poly: *const c_char,
    kmax: usize,
    out: *mut *mut PhCexState,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let seed = parse_seed_poly(str_arg(seed_poly, "seed_poly")?)?;
        let state = build_cex_series(n, &seed, kmax)?;
        *out = Box::into_raw(Box::new(PhCexState { state }));
        Ok(())
    })
}

/// Whether every residual coefficient below the truncation order vanishes,
/// and whether the series terminates (`a_kmax = 0`).
///
/// # Safety
/// `s` must be a live handle; `vanishes` and `terminates` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ph_cex_check(
    s: *const PhCexState,
    vanishes: *mut bool,
    terminates: *mut bool,
) -> PhStatus {
    guard(|| {
        check_out(vanishes, "vanishes")?;
        check_out(terminates, "terminates")?;
        let s = &handle(s, "cex state")?.state;
        let r = cex_residual(s);
        *vanishes = r[..s.kmax].iter().all(|p| p.is_zero_poly());
        *terminates = s.a.last().is_some_and(|a| a.is_zero_poly());
        Ok(())
    })
}

/// Counterexample state as JSON `{n, kmax, seed, a}`.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_cex_json(s: *const PhCexState, out: *mut *mut c_char) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        out_string(out, handle(s, "cex state")?.state.to_json().to_string())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ph_cex_free(s: *mut PhCexState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("norms"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Gevrey fit of `norms[0..len]` with the default thresholds.
///
/// # Safety
/// `norms` must point to `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_gevrey_fit(norms: *const f64, len: usize, out: *mut PhGrowthFit) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        let fit = gevrey_fit(slice_arg(norms, len)?, &GrowthThresholds::default())?;
        *out = PhGrowthFit {
            radius: fit.radius_estimate.unwrap_or(f64::NAN),
            has_radius: fit.radius_estimate.is_some(),
            gevrey_order: fit.gevrey_order,
            fit_residual: fit.fit_residual,
            classification: match fit.classification {
                Classification::Convergent => PhClassification::Convergent,
                Classification::Gevrey(_) => PhClassification::Gevrey,
                Classification::Unknown => PhClassification::Unknown,
            },
        };
        Ok(())
    })
}

/// Domb–Sykes radius of `norms[0..len]`; `*has_radius` is false when the
/// ratios diverge.
///
/// # Safety
/// `norms` must point to `len` doubles; `out` and `has_radius` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ph_radius_estimate(
    norms: *const f64,
    len: usize,
    out: *mut f64,
    has_radius: *mut bool,
) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        check_out(has_radius, "has_radius")?;
        let r = radius_estimate(slice_arg(norms, len)?)?;
        *has_radius = r.is_some();
        *out = r.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Unit-ball check on `points` radii: largest relative residual and whether
/// the expansion through order `k` is identically zero.
///
/// # Safety
/// `max_residual` and `expansion_zero` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ph_ball_benchmark(
    n: u32,
    k: u32,
    points: usize,
    max_residual: *mut f64,
    expansion_zero: *mut bool,
) -> PhStatus {
    guard(|| {
        check_out(max_residual, "max_residual")?;
        check_out(expansion_zero, "expansion_zero")?;
        let rep = ball_benchmark(n, k, &default_radius_grid(points))?;
        *max_residual = rep.max_pointwise_residual;
        *expansion_zero = rep.expansion_zero;
        Ok(())
    })
}

/// `log det(I + X)` for a `dim × dim` row-major matrix `x`, via `k` trace powers.
///
/// # Safety
/// `x` must point to `dim * dim` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ph_logdet(x: *const f64, dim: usize, k: u32, out: *mut f64) -> PhStatus {
    guard(|| {
        check_out(out, "out")?;
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let vals = slice_arg(x, dim * dim)?;
        let m = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| PolyhomSeries::<f64>::constant(Var::D, 0, vals[i * dim + j]))
                    .collect()
            })
            .collect();
        let s = logdet_series(&TracePowerInput::Matrix(m), k)?;
        *out = s.coeff_or_zero(0, 0);
        Ok(())
    })
}
