//! Second- and third-order resonance analysis in reduced coordinates.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ChainParams;
use crate::spectrum::{dispersion_det, omega, wrap_angle, Branch, Wave};

const SCAN_POINTS: usize = 2048;

/// Reduced coordinates `c = (cos theta + 1)/2`, `d1 = (c1+c2)^2/f`,
/// `d2 = (c1-c2)^2/f` with `f = 16 v_{1,1} v_{2,1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoords {
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    pub f: f64,
}

impl ReducedCoords {
    /// Squared branch frequency `(sqrt(f)/2)(sqrt(d1) +- sqrt(d2 + c))`.
    pub fn omega_sq(&self, branch: Branch) -> f64 {
        let a = self.d1.sqrt();
        let b = (self.d2 + self.c).sqrt();
        0.5 * self.f.sqrt()
            * match branch {
                Branch::Acoustic => a - b,
                Branch::Optical => a + b,
            }
    }
}

pub fn reduced_coords(p: &ChainParams, theta: f64) -> ReducedCoords {
    let f = 16.0 * p.v1.k1 * p.v2.k1;
    let (c1, c2) = (p.c1(), p.c2());
    ReducedCoords {
        c: 0.5 * (theta.cos() + 1.0),
        d1: (c1 + c2).powi(2) / f,
        d2: (c1 - c2).powi(2) / f,
        f,
    }
}

/// Harmonic chain of the two-parameter family `v_{1,1} = a`,
/// `v_{2,1} = gamma a`, `w_{1,1} = w_{2,1} = b`.
pub fn family_params(a: f64, gamma: f64, b: f64) -> ChainParams {
    ChainParams::harmonic(a, gamma * a, b, b)
}

/// `2 omega_-(theta) - omega_+(2 theta)`.
pub fn acoustic_optical_mismatch(p: &ChainParams, theta: f64) -> f64 {
    2.0 * omega(p, Branch::Acoustic, theta) - omega(p, Branch::Optical, wrap_angle(2.0 * theta))
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| PI * i as f64 / (points - 1) as f64)
}

/// Wavenumbers in `[0, pi]` at which an acoustic wave drives the optical
/// branch at twice its frequency. Negative roots follow by symmetry.
pub fn find_acoustic_optical_resonance(p: &ChainParams) -> Vec<f64> {
    let h = |t: f64| acoustic_optical_mismatch(p, t);
    let thetas: Vec<f64> = grid(SCAN_POINTS).collect();
    let values: Vec<f64> = thetas.iter().map(|&t| h(t)).collect();
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.iter().all(|q| (q - r).abs() > 1e-9) {
            roots.push(r);
        }
    };
    for i in 0..thetas.len() {
        if values[i].abs() <= 1e-12 {
            push(thetas[i], &mut roots);
            continue;
        }
        if i + 1 < thetas.len()
            && values[i].signum() * values[i + 1].signum() < 0.0
            && values[i + 1].abs() > 1e-12
        {
            let (mut lo, mut hi) = (thetas[i], thetas[i + 1]);
            let mut flo = values[i];
            let mut mid = 0.5 * (lo + hi);
            for _ in 0..200 {
                mid = 0.5 * (lo + hi);
                let fm = h(mid);
                if fm.abs() <= 1e-12 || mid == lo || mid == hi {
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            push(mid, &mut roots);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Ratio `b/a` placing the acoustic-to-optical resonance of the family at
/// `c = (cos theta + 1)/2`, or `None` when no positive ratio exists.
///
/// The returned ratio is checked against the dispersion relation directly.
pub fn solve_family_ratio(gamma: f64, c: f64) -> Result<Option<f64>> {
    if !(gamma > 1.0) || !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!(
            "need gamma > 1 and c in [0,1], got gamma={gamma}, c={c}"
        )));
    }
    let delta = (gamma - 1.0).powi(2) / (4.0 * gamma);
    let q = (2.0 * c - 1.0).powi(2);
    let rhs = 17.0 * delta + 16.0 * c + q + 8.0 * (delta + c).sqrt() * (delta + q).sqrt();
    // d1(r) = ((1 + gamma) + r)^2 / (4 gamma) must equal rhs / 9.
    let r = (4.0 * gamma * rhs / 9.0).sqrt() - (1.0 + gamma);
    if !(r > 0.0) {
        return Ok(None);
    }
    let theta = (2.0 * c - 1.0).clamp(-1.0, 1.0).acos();
    let miss = acoustic_optical_mismatch(&family_params(1.0, gamma, r), theta);
    if miss.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "ratio {r} fails the dispersion check at theta={theta}: mismatch {miss:e}"
        )));
    }
    Ok(Some(r))
}

/// Smallest distance between `2 omega_+(theta)` and either branch at
/// `2 theta` over a grid on `[0, pi]`.
pub fn optical_closure_margin(p: &ChainParams) -> f64 {
    grid(SCAN_POINTS)
        .map(|t| {
            let two = 2.0 * omega(p, Branch::Optical, t);
            let t2 = wrap_angle(2.0 * t);
            (two - omega(p, Branch::Optical, t2))
                .abs()
                .min((two - omega(p, Branch::Acoustic, t2)).abs())
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticScan {
    pub c_e: f64,
    pub max_g: f64,
    pub argmax: f64,
}

/// Maximum over `[c_e, 1]` of the squared acoustic-to-acoustic condition of
/// the family, whose positivity would be needed for a resonance.
pub fn acoustic_acoustic_scan(gamma: f64) -> AcousticScan {
    let delta = (gamma - 1.0).powi(2) / (4.0 * gamma);
    let c_e = (0.5 * (5.0 - (15.0 * delta + 24.0).sqrt())).max(0.0);
    let g = |c: f64| {
        let q = (2.0 * c - 1.0).powi(2);
        8.0 * delta - 9.0 + 16.0 * c + q - 8.0 * (delta + c).sqrt() * (delta + q).sqrt()
    };
    let samples = 1024;
    let cs: Vec<f64> = (0..samples)
        .map(|i| c_e + (1.0 - c_e) * i as f64 / (samples - 1) as f64)
        .collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &c) in cs.iter().enumerate() {
        let v = g(c);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut argmax = cs[best_i];
    // Golden-section refinement inside the neighbouring samples.
    let (mut lo, mut hi) = (
        cs[best_i.saturating_sub(1)],
        cs[(best_i + 1).min(samples - 1)],
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) >= g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let refined = 0.5 * (lo + hi);
    if g(refined) > best {
        best = g(refined);
        argmax = refined;
    }
    AcousticScan {
        c_e,
        max_g: best,
        argmax,
    }
}

/// `min_theta omega_-(theta) + omega_+(2 theta) - omega_+(3 theta)` on a grid.
pub fn third_order_margin(p: &ChainParams) -> f64 {
    grid(SCAN_POINTS)
        .map(|t| {
            omega(p, Branch::Acoustic, t) + omega(p, Branch::Optical, wrap_angle(2.0 * t))
                - omega(p, Branch::Optical, wrap_angle(3.0 * t))
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceMode {
    NonResonant,
    Resonant,
}

/// One determinant evaluation `|det H(omega, theta)|` against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCheck {
    pub label: String,
    pub omega: f64,
    pub theta: f64,
    pub det: f64,
    pub tol: f64,
}

impl DetCheck {
    pub fn new(p: &ChainParams, label: impl Into<String>, omega: f64, theta: f64) -> Self {
        Self {
            label: label.into(),
            omega,
            theta,
            det: dispersion_det(p, omega, theta).norm(),
            tol: resonance_tolerance(omega),
        }
    }

    pub fn passed(&self) -> bool {
        self.det >= self.tol
    }
}

/// Scale-aware determinant threshold `1e-6 (1 + omega^4)`.
pub fn resonance_tolerance(omega: f64) -> f64 {
    1e-6 * (1.0 + omega.powi(4))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonresonanceReport {
    pub mode: ResonanceMode,
    pub checks: Vec<DetCheck>,
}

/// Verifies the determinant conditions of the claimed interaction mode.
pub fn check_nonresonance(
    p: &ChainParams,
    w1: &Wave,
    w2: &Wave,
    mode: ResonanceMode,
) -> Result<NonresonanceReport> {
    let checks = match mode {
        ResonanceMode::NonResonant => vec![
            DetCheck::new(p, "(2w1,2t1)", 2.0 * w1.omega, 2.0 * w1.theta),
            DetCheck::new(p, "(2w2,2t2)", 2.0 * w2.omega, 2.0 * w2.theta),
            DetCheck::new(p, "(w1+w2,t1+t2)", w1.omega + w2.omega, w1.theta + w2.theta),
            DetCheck::new(p, "(w1-w2,t1-t2)", w1.omega - w2.omega, w1.theta - w2.theta),
        ],
        ResonanceMode::Resonant => {
            let dtheta = wrap_angle(w2.theta - 2.0 * w1.theta);
            let domega = w2.omega - 2.0 * w1.omega;
            if dtheta.abs() > 1e-10 || domega.abs() > 1e-10 * (1.0 + w2.omega) {
                return Err(Error::ModeMismatch(format!(
                    "second carrier is not the square of the first: dtheta={dtheta:e}, domega={domega:e}"
                )));
            }
            vec![
                DetCheck::new(p, "(3w1,3t1)", 3.0 * w1.omega, 3.0 * w1.theta),
                DetCheck::new(p, "(4w1,4t1)", 4.0 * w1.omega, 4.0 * w1.theta),
            ]
        }
    };
    if let Some(bad) = checks.iter().find(|c| !c.passed()) {
        return Err(Error::ModeMismatch(format!(
            "|det H{}| = {:.3e} below tolerance {:.3e}",
            bad.label, bad.det, bad.tol
        )));
    }
    Ok(NonresonanceReport { mode, checks })
}
