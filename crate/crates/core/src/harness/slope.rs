//! Least-squares slopes on log-log data.

use crate::error::{Error, Result};
use crate::harness::sweep::{ErrorField, ErrorRecord};

/// Slope of the least-squares line through `(log mu, log err)`.
/// Points with a non-positive coordinate are skipped.
pub fn fit_slope_points(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|(m, e)| *m > 0.0 && *e > 0.0).map(|(m, e)| (m.ln(), e.ln())).collect();
    if logs.len() < 3 {
        return Err(Error::InsufficientData(logs.len()));
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    Ok(sxy / sxx)
}

/// Slope of `field` against `mu` over records with `mu` in `[lo, hi]`.
pub fn fit_slope(records: &[ErrorRecord], field: ErrorField, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.mu >= lo * (1.0 - 1e-9) && r.mu <= hi * (1.0 + 1e-9))
        .map(|r| (r.mu, r.get(field)))
        .collect();
    fit_slope_points(&pts)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = values.len() as f64;
    let m = values.iter().sum::<f64>() / k;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / k;
    (m, v.sqrt())
}
