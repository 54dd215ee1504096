//! Least-squares power laws on log-log data and Richardson order estimates.

use serde::{Deserialize, Serialize};

/// `y ~ prefactor * x^exponent`, with the RMS of the natural-log residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
}

/// Fits a power law to the strictly positive pairs; returns `None` with fewer
/// than two usable points.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Some(PowerFit {
        exponent: slope,
        prefactor: icpt.exp(),
        residual: (rss / n).sqrt(),
    })
}

/// Observed order from three solutions at step sizes `h`, `h/r`, `h/r^2`,
/// given the two successive difference norms.
pub fn richardson_order(diff_coarse: f64, diff_fine: f64, ratio: f64) -> f64 {
    (diff_coarse / diff_fine).ln() / ratio.ln()
}
