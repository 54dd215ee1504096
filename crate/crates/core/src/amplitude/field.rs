use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;

/// Complex samples of one envelope on a uniform periodic grid over
/// `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    values: Vec<Complex64>,
    length: f64,
}

impl AmplitudeField {
    /// Checks that the grid has at least 16 points, a power of two, and that
    /// all samples are finite.
    pub fn new(values: Vec<Complex64>, length: f64) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "grid size {n} must be a power of two >= 16"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Grid(format!(
                "domain length {length} must be positive"
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Grid("non-finite amplitude value".into()));
        }
        Ok(Self { values, length })
    }

    pub(crate) fn from_raw(values: Vec<Complex64>, length: f64) -> Self {
        Self { values, length }
    }

    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..n).map(|i| f(i as f64 * length / n as f64)).collect();
        Self::new(values, length)
    }

    pub fn zeros(n: usize, length: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], length)
    }

    pub fn constant(n: usize, length: f64, amplitude: Complex64) -> Result<Self> {
        Self::new(vec![amplitude; n], length)
    }

    /// `amplitude * sech(width * (y - length/2))`.
    pub fn sech(n: usize, length: f64, amplitude: Complex64, width: f64) -> Result<Self> {
        Self::from_fn(n, length, |y| {
            amplitude / (width * (y - 0.5 * length)).cosh()
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn derivative(&self) -> Self {
        Self::from_raw(fourier::derivative(&self.values, self.length), self.length)
    }

    /// The field `y -> A(y + shift)`.
    pub fn translated(&self, shift: f64) -> Self {
        Self::from_raw(
            fourier::translate(&self.values, self.length, shift),
            self.length,
        )
    }

    /// Trigonometric interpolant evaluated at `m` equispaced points.
    pub fn sample(&self, m: usize) -> Vec<Complex64> {
        fourier::resample(&self.values, m)
    }

    /// `L^2(0, length)` norm by the periodic trapezoidal rule.
    pub fn l2_norm(&self) -> f64 {
        (self.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
