//! Polyhomogeneous expansions for Fuchsian ODEs with trace-power
//! nonlinearities, with numeric diagnostics and a finite-difference oracle.

pub mod bivariate;
pub mod cli;
pub mod cma;
pub mod config;
pub mod counterexample;
pub mod diagnostics;
pub mod error;
pub mod fuchsian;
pub mod oracle;
pub mod ring;
pub mod series;

pub use bivariate::BivariatePoly;
pub use error::*;
pub use ring::{Field, Rational, Ring, RingKind};
pub use series::{PolyhomSeries, Var};

/// Fixed-precision float rendering used by every CSV writer, so repeated
/// runs produce identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.12e}")
    }
}
