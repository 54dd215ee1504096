//! FFT helpers on periodic grids: spectral differentiation, translation and
//! band-limited resampling between grids of different sizes.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized forward transform `X_m = sum_j x_j e^{-2 pi i jm/n}`.
pub fn forward(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    if !buf.is_empty() {
        plan(buf.len(), false).process(&mut buf);
    }
    buf
}

/// Inverse of [`forward`], including the `1/n` factor.
pub fn inverse(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    let n = buf.len();
    if n > 0 {
        plan(n, true).process(&mut buf);
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }
    buf
}

/// Signed mode number of FFT slot `m`; the Nyquist slot of an even grid maps
/// to `-n/2`.
pub fn signed_mode(m: usize, n: usize) -> i64 {
    if 2 * m < n {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

fn apply_symbol(values: &[Complex64], symbol: impl Fn(i64) -> Complex64) -> Vec<Complex64> {
    let n = values.len();
    let mut spec = forward(values);
    for (m, v) in spec.iter_mut().enumerate() {
        *v *= symbol(signed_mode(m, n));
    }
    inverse(&spec)
}

/// Spectral derivative of a periodic function sampled on `[0, length)`.
pub fn derivative(values: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = values.len() as i64;
    let base = 2.0 * std::f64::consts::PI / length;
    apply_symbol(values, |k| {
        if n % 2 == 0 && k == -n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, base * k as f64)
        }
    })
}

/// Samples of `y -> f(y + shift)` for the trigonometric interpolant `f`.
pub fn translate(values: &[Complex64], length: f64, shift: f64) -> Vec<Complex64> {
    let base = 2.0 * std::f64::consts::PI / length;
    apply_symbol(values, |k| {
        Complex64::from_polar(1.0, base * k as f64 * shift)
    })
}

/// Trigonometric interpolant of `values` sampled at `m` equispaced points of
/// the same period. Upsampling splits the Nyquist coefficient evenly;
/// downsampling keeps the representable band.
pub fn resample(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = values.len();
    if m == n {
        return values.to_vec();
    }
    let spec = forward(values);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let lo = -((m / 2) as i64);
    let hi = ((m - 1) / 2) as i64;
    let slot = |k: i64| k.rem_euclid(m as i64) as usize;
    for (idx, &c) in spec.iter().enumerate() {
        let k = signed_mode(idx, n);
        if n.is_multiple_of(2) && k == -((n / 2) as i64) && m > n {
            out[slot(k)] += 0.5 * c;
            out[slot(-k)] += 0.5 * c;
        } else if k >= lo && k <= hi {
            out[slot(k)] += c;
        } else if m.is_multiple_of(2) && k == (m / 2) as i64 {
            out[m / 2] += c;
        }
    }
    let scale = m as f64 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    inverse(&out)
}
