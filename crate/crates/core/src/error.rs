use thiserror::Error;

use crate::ring::RingKind;
use crate::series::Var;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("variable mismatch: {left} vs {right}")]
    VariableMismatch { left: Var, right: Var },
    #[error("term x^{i} (log x)^{j} is not representable (i = 0 with a log factor)")]
    BannedTerm { i: u32, j: u32 },
    #[error("term x^{i} (log x)^{j} has a derivative outside the representable class")]
    NonDifferentiable { i: u32, j: u32 },
    #[error("cannot differentiate a series truncated at order 0")]
    TruncationExhausted,
    #[error("{ring} coefficients cannot represent {what}")]
    RingCapability { ring: RingKind, what: &'static str },
    #[error("composition needs a series with zero constant term")]
    NonzeroConstantTerm,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuchsianError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("double indicial root at resonant order {order}; only simple resonances are supported")]
    DoubleRoot { order: u32 },
    #[error("resonance at order 0 would need a (log x)^j term at i = 0")]
    LogAtOrderZero,
    #[error("truncation order {k} is below the required minimum {min}")]
    TruncationTooLow { k: u32, min: u32 },
    #[error("complex dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("nonlinearity is not of higher order: residual at order {order} survived the linear solve")]
    NonlinearityNotHigherOrder { order: u32 },
    #[error("nonlinearity does not vanish at the zero series")]
    NonlinearityNotVanishing,
    #[error("invalid nonlinearity program: {0}")]
    InvalidProgram(String),
    #[error("perturbation coefficient series must be smooth (no log terms)")]
    LogInPerturbation,
    #[error("spectral radius {rho:.3e} of the constant part is not below {limit}")]
    SpectralRadius { rho: f64, limit: f64 },
    #[error("matrix input must be square and nonempty")]
    NotSquare,
    #[error("cannot decide the spectral radius of non-numeric coefficients")]
    SpectralUnknown,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmaError {
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("radius grid point {0} is not strictly inside (0, 1)")]
    GridOutOfRange(f64),
    #[error("radius grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CexError {
    #[error("A(a_{k}) is not divisible by d")]
    DivisionByD { k: usize },
    #[error("a_{k} is not divisible by d^{power}")]
    MissingFactor { k: usize, power: u32 },
    #[error("kmax {kmax} exceeds the supported maximum {max}")]
    KmaxTooLarge { kmax: usize, max: usize },
    #[error("bound constant must be finite and nonnegative, got {0}")]
    InvalidBound(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("need at least {needed} nonzero entries, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("norms must be finite and nonnegative")]
    InvalidNorm,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("tridiagonal system is singular at row {row}")]
    Singular { row: usize },
    #[error("basis is ill-conditioned (condition number {cond:.3e} > {limit:.0e})")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("basis must have between 1 and {max} functions, got {got}")]
    BasisSize { max: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    InvalidValue { key: String, value: String },
}
