//! Growth classification of coefficient-norm sequences: Domb–Sykes radius
//! estimates and Gevrey-order fits.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::error::DiagnosticsError;

pub const MIN_RADIUS_POINTS: usize = 6;
pub const MIN_GEVREY_POINTS: usize = 8;

/// Classification cut-offs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthThresholds {
    /// Fitted order below this (with a positive radius) means convergent.
    pub convergent_sigma: f64,
    /// RMS of the log-space fit must be below this to claim a Gevrey order.
    pub fit_residual: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        Self {
            convergent_sigma: 0.15,
            fit_residual: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification {
    Convergent,
    Gevrey(f64),
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    /// `Some(inf)` when the ratios tend to zero.
    pub radius_estimate: Option<f64>,
    pub gevrey_order: f64,
    pub fit_residual: f64,
    pub classification: Classification,
}

impl GrowthFit {
    pub fn to_json(&self) -> Value {
        let radius = match self.radius_estimate {
            None => Value::Null,
            Some(r) if r.is_infinite() => json!("infinite"),
            Some(r) => json!(r),
        };
        let (class, order) = match self.classification {
            Classification::Convergent => ("CONVERGENT", Value::Null),
            Classification::Gevrey(s) => ("GEVREY", json!(s)),
            Classification::Unknown => ("UNKNOWN", Value::Null),
        };
        json!({
            "radius_estimate": radius,
            "gevrey_order": finite_or_null(self.gevrey_order),
            "fit_residual": finite_or_null(self.fit_residual),
            "classification": class,
            "classified_order": order,
        })
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Pairs `(k, |a_k|)` for the plain sequence `a_0, a_1, …`.
pub fn indexed(norms: &[f64]) -> Vec<(u32, f64)> {
    norms
        .iter()
        .enumerate()
        .map(|(k, v)| (k as u32, *v))
        .collect()
}

/// `(k, ln a_k)` for a sequence of norms; zeros map to `-inf`.
pub fn log_points(points: &[(u32, f64)]) -> Vec<(u32, f64)> {
    points
        .iter()
        .map(|(k, v)| (*k, if *v < 0.0 { f64::NAN } else { v.ln() }))
        .collect()
}

/// Drops zero entries (`-inf`); the rest keep their own indices.
fn nonzero_entries(logs: &[(u32, f64)]) -> Result<Vec<(u32, f64)>, DiagnosticsError> {
    if logs.iter().any(|(_, v)| v.is_nan() || *v == f64::INFINITY) {
        return Err(DiagnosticsError::InvalidNorm);
    }
    Ok(logs.iter().filter(|(_, v)| v.is_finite()).copied().collect())
}

fn least_squares(x: DMatrix<f64>, y: DVector<f64>) -> (DVector<f64>, f64) {
    let svd = x.clone().svd(true, true);
    let beta = svd
        .solve(&y, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(x.ncols()));
    let resid = &x * &beta - y;
    let rms = (resid.norm_squared() / resid.len() as f64).sqrt();
    (beta, rms)
}

pub fn radius_estimate(norms: &[f64]) -> Result<Option<f64>, DiagnosticsError> {
    radius_estimate_logs(&log_points(&indexed(norms)))
}

/// Domb–Sykes: per-step ratios `(a_k / a_{k'})^{1/(k−k')}` over the tail half
/// are fitted as `α + β/k`; the radius is `1/α`. Returns `None` when the
/// ratios grow like a positive power of `k`.
pub fn radius_estimate_indexed(points: &[(u32, f64)]) -> Result<Option<f64>, DiagnosticsError> {
    radius_estimate_logs(&log_points(points))
}

/// [`radius_estimate_indexed`] on `(k, ln a_k)` pairs.
pub fn radius_estimate_logs(logs: &[(u32, f64)]) -> Result<Option<f64>, DiagnosticsError> {
    let pts = nonzero_entries(logs)?;
    if pts.len() < MIN_RADIUS_POINTS {
        return Err(DiagnosticsError::TooFewPoints {
            needed: MIN_RADIUS_POINTS,
            got: pts.len(),
        });
    }
    let ratios: Vec<(f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let step = (w[1].0 as f64 - w[0].0 as f64).max(1.0);
            (w[1].0 as f64, ((w[1].1 - w[0].1) / step).exp())
        })
        .collect();
    let tail = &ratios[ratios.len() / 2..];

    let ln_k = DMatrix::from_fn(tail.len(), 2, |i, j| if j == 0 { 1.0 } else { tail[i].0.ln() });
    let ln_r = DVector::from_iterator(tail.len(), tail.iter().map(|(_, r)| r.ln()));
    let (beta, _) = least_squares(ln_k, ln_r);
    if beta[1] > 0.5 {
        return Ok(None);
    }

    let inv_k = DMatrix::from_fn(tail.len(), 2, |i, j| if j == 0 { 1.0 } else { 1.0 / tail[i].0 });
    let r = DVector::from_iterator(tail.len(), tail.iter().map(|(_, r)| *r));
    let (beta, _) = least_squares(inv_k, r);
    let limit = beta[0];
    Ok(Some(if limit <= 0.0 { f64::INFINITY } else { 1.0 / limit }))
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

pub fn gevrey_fit(norms: &[f64], th: &GrowthThresholds) -> Result<GrowthFit, DiagnosticsError> {
    gevrey_fit_logs(&log_points(&indexed(norms)), th)
}

pub fn gevrey_fit_indexed(
    points: &[(u32, f64)],
    th: &GrowthThresholds,
) -> Result<GrowthFit, DiagnosticsError> {
    gevrey_fit_logs(&log_points(points), th)
}

/// Fits `ln a_k ≈ σ ln(k!) + k ln B + c` over the nonzero entries of
/// `(k, ln a_k)` pairs.
pub fn gevrey_fit_logs(
    logs: &[(u32, f64)],
    th: &GrowthThresholds,
) -> Result<GrowthFit, DiagnosticsError> {
    let pts = nonzero_entries(logs)?;
    if pts.is_empty() {
        return Ok(GrowthFit {
            radius_estimate: None,
            gevrey_order: f64::NAN,
            fit_residual: f64::NAN,
            classification: Classification::Unknown,
        });
    }
    if pts.len() < MIN_GEVREY_POINTS {
        return Err(DiagnosticsError::TooFewPoints {
            needed: MIN_GEVREY_POINTS,
            got: pts.len(),
        });
    }
    let x = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => ln_factorial(pts[i].0),
        1 => pts[i].0 as f64,
        _ => 1.0,
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|(_, v)| *v));
    let (beta, rms) = least_squares(x, y);
    let sigma = beta[0];
    let radius = radius_estimate_logs(&pts)?;
    let positive_radius = radius.is_some_and(|r| r > 0.0);
    let classification = if sigma < th.convergent_sigma && positive_radius {
        Classification::Convergent
    } else if rms < th.fit_residual {
        Classification::Gevrey(sigma)
    } else {
        Classification::Unknown
    };
    Ok(GrowthFit {
        radius_estimate: radius,
        gevrey_order: sigma,
        fit_residual: rms,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    fn family(f: impl Fn(u32) -> f64, n: u32) -> Vec<f64> {
        (0..n).map(f).collect()
    }

    #[test]
    fn radius_examples() {
        let geo = family(|k| 0.5f64.powi(k as i32), 20);
        assert!((radius_estimate(&geo).unwrap().unwrap() - 2.0).abs() < 0.01);
        let k3 = family(|k| (k + 1) as f64 * 3f64.powi(-(k as i32 + 1)), 30);
        assert!((radius_estimate(&k3).unwrap().unwrap() - 3.0).abs() < 0.05);
        let fact = family(|k| factorial(2 * k), 20);
        assert_eq!(radius_estimate(&fact).unwrap(), None);
        let entire = family(|k| 1.0 / factorial(k), 20);
        assert_eq!(radius_estimate(&entire).unwrap(), Some(f64::INFINITY));
        assert_eq!(
            radius_estimate(&[1.0, 0.5, 0.25]),
            Err(DiagnosticsError::TooFewPoints { needed: 6, got: 3 })
        );
    }

    #[test]
    fn gevrey_examples() {
        let th = GrowthThresholds::default();
        let sq = family(|k| factorial(k).powi(2), 20);
        let fit = gevrey_fit(&sq, &th).unwrap();
        assert!((fit.gevrey_order - 2.0).abs() < 0.1);
        assert!(matches!(fit.classification, Classification::Gevrey(_)));

        let f1 = gevrey_fit(&family(factorial, 20), &th).unwrap();
        assert!((f1.gevrey_order - 1.0).abs() < 0.1);

        let geo = gevrey_fit(&family(|k| 0.5f64.powi(k as i32), 20), &th).unwrap();
        assert!(geo.gevrey_order.abs() < 0.15);
        assert_eq!(geo.classification, Classification::Convergent);

        let twok = gevrey_fit(&family(|k| factorial(2 * k), 30), &th).unwrap();
        assert!((twok.gevrey_order - 2.0).abs() < 0.1, "{}", twok.gevrey_order);

        let zero = gevrey_fit(&[0.0; 10], &th).unwrap();
        assert_eq!(zero.classification, Classification::Unknown);
        assert!(zero.gevrey_order.is_nan());
        assert!(gevrey_fit(&[1.0, 2.0, 3.0], &th).is_err());
        assert_eq!(gevrey_fit(&[1.0, f64::NAN], &th), Err(DiagnosticsError::InvalidNorm));
    }

    #[test]
    fn scale_and_shift_robustness() {
        let th = GrowthThresholds::default();
        for seq in [
            family(|k| 0.5f64.powi(k as i32), 20),
            family(factorial, 20),
            family(|k| factorial(k).powi(2), 20),
        ] {
            let base = gevrey_fit(&seq, &th).unwrap();
            let scaled: Vec<f64> = seq.iter().map(|v| v * 37.5).collect();
            let s = gevrey_fit(&scaled, &th).unwrap();
            assert!((s.gevrey_order - base.gevrey_order).abs() < 1e-9);
            assert_eq!(
                std::mem::discriminant(&s.classification),
                std::mem::discriminant(&base.classification)
            );
            let shifted = gevrey_fit_indexed(&indexed(&seq)[2..], &th).unwrap();
            assert!((shifted.gevrey_order - base.gevrey_order).abs() < 0.1);
        }
    }

    #[test]
    fn zeros_are_skipped() {
        let mut seq: Vec<f64> = family(|k| 0.5f64.powi(k as i32), 24)
            .into_iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 1 { 0.0 } else { v })
            .collect();
        seq.extend([0.0; 5]);
        let fit = gevrey_fit(&seq, &GrowthThresholds::default()).unwrap();
        assert_eq!(fit.classification, Classification::Convergent);
    }

    #[test]
    fn json_shapes() {
        let fit = GrowthFit {
            radius_estimate: Some(f64::INFINITY),
            gevrey_order: 0.0,
            fit_residual: 0.0,
            classification: Classification::Convergent,
        };
        assert_eq!(fit.to_json()["radius_estimate"], json!("infinite"));
        let fit = GrowthFit {
            radius_estimate: None,
            classification: Classification::Gevrey(2.0),
            ..fit
        };
        assert_eq!(fit.to_json()["radius_estimate"], Value::Null);
        assert_eq!(fit.to_json()["classified_order"], json!(2.0));
    }
}
