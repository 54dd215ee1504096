use std::fmt::Write as _;

use serde::Serialize;

use crate::fit::power_law_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub value: f64,
}

/// Measured `value(eps)` rows with a least-squares power law on log-log
/// axes and a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub experiment: String,
    pub quantity: String,
    pub rows: Vec<ScalingRow>,
    /// Rows that entered the fit, those above ten times the noise floor.
    pub fitted: usize,
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_residual: f64,
    /// Exponent after dropping the largest `eps` (NaN with fewer than four
    /// fitted rows).
    pub exponent_without_largest: f64,
    pub criterion: String,
    pub passed: bool,
    /// Further named measurements of the run.
    pub extra: Vec<(String, f64)>,
}

impl ScalingReport {
    /// Fits `rows` above `10 * noise_floor`; the verdict is left to the caller.
    pub fn fitted(
        experiment: &str,
        quantity: &str,
        rows: Vec<ScalingRow>,
        noise_floor: f64,
    ) -> Self {
        let keep: Vec<&ScalingRow> = rows
            .iter()
            .filter(|r| r.value > 10.0 * noise_floor)
            .collect();
        let xs: Vec<f64> = keep.iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = keep.iter().map(|r| r.value).collect();
        let fit = if keep.len() >= 3 {
            power_law_fit(&xs, &ys)
        } else {
            None
        };
        let reduced = if keep.len() >= 4 {
            let (i, _) =
                xs.iter().enumerate().fold(
                    (0, f64::MIN),
                    |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
                );
            let (rx, ry): (Vec<f64>, Vec<f64>) = xs
                .iter()
                .zip(&ys)
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, (x, y))| (*x, *y))
                .unzip();
            power_law_fit(&rx, &ry).map_or(f64::NAN, |f| f.exponent)
        } else {
            f64::NAN
        };
        Self {
            experiment: experiment.to_string(),
            quantity: quantity.to_string(),
            fitted: keep.len(),
            exponent: fit.map_or(f64::NAN, |f| f.exponent),
            prefactor: fit.map_or(f64::NAN, |f| f.prefactor),
            fit_residual: fit.map_or(f64::NAN, |f| f.residual),
            exponent_without_largest: reduced,
            rows,
            criterion: String::new(),
            passed: false,
            extra: Vec::new(),
        }
    }

    pub fn with_verdict(mut self, criterion: impl Into<String>, passed: bool) -> Self {
        self.criterion = criterion.into();
        self.passed = passed;
        self
    }

    pub fn push_extra(&mut self, name: &str, value: f64) {
        self.extra.push((name.to_string(), value));
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extra.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// `max / min` of the measured values.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                (lo.min(r.value), hi.max(r.value))
            });
        hi / lo
    }

    /// `eps,<quantity>` table.
    pub fn to_csv(&self) -> String {
        let mut out = format!("eps,{}\n", self.quantity);
        for r in &self.rows {
            let _ = writeln!(out, "{},{}", r.eps, r.value);
        }
        out
    }

    /// One line `PASS|FAIL <experiment>: ...`.
    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{} {}: {} exponent {:.3} (fit residual {:.3}, {} of {} rows fitted); {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.experiment,
            self.quantity,
            self.exponent,
            self.fit_residual,
            self.fitted,
            self.rows.len(),
            self.criterion
        );
        for (k, v) in &self.extra {
            let _ = write!(line, "; {k}={v:.4e}");
        }
        line
    }
}
