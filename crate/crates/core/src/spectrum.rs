//! Dispersion matrix, branch frequencies, group velocities and eigenvectors
//! of the linearized chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::ChainParams;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Vec2 = [Complex64; 2];

const DEGENERATE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Acoustic,
    Optical,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Acoustic => "acoustic",
            Branch::Optical => "optical",
        })
    }
}

/// Polarization of an eigenmode: the ratio `rho` with eigenvector
/// `(1, -rho)`, or the basis-vector convention at `theta = +-pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    Ratio(Complex64),
    Degenerate,
}

/// A plane-wave carrier on one branch.
///
/// `right` spans the kernel of the dispersion matrix and `left` its left
/// kernel. Amplitudes are stored as a scalar lead coefficient times `right`:
/// the first component for generic wavenumbers and acoustic waves at `pi`,
/// the second component for optical waves at `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub branch: Branch,
    pub theta: f64,
    pub omega: f64,
    pub polarization: Polarization,
    pub right: Vec2,
    pub left: Vec2,
}

impl Wave {
    pub fn new(p: &ChainParams, branch: Branch, theta: f64) -> Self {
        polarization(p, branch, theta)
    }

    pub fn rho(&self) -> Option<Complex64> {
        match self.polarization {
            Polarization::Ratio(r) => Some(r),
            Polarization::Degenerate => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.polarization, Polarization::Degenerate)
    }

    pub fn left_dot_right(&self) -> Complex64 {
        self.left[0] * self.right[0] + self.left[1] * self.right[1]
    }

    pub fn group_velocity(&self, p: &ChainParams) -> f64 {
        group_velocity(p, self.branch, self.theta)
    }
}

/// Representative of `theta` in `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub fn dispersion_matrix(p: &ChainParams, omega: f64, theta: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, theta);
    let w2 = omega * omega;
    [
        [Complex64::new(w2 - p.c1(), 0.0), p.v1.k1 * (e + 1.0)],
        [p.v2.k1 * (e.conj() + 1.0), Complex64::new(w2 - p.c2(), 0.0)],
    ]
}

pub fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn dispersion_det(p: &ChainParams, omega: f64, theta: f64) -> Complex64 {
    det2(&dispersion_matrix(p, omega, theta))
}

pub fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Solves `m x = b` by Cramer's rule; `None` for an exactly singular matrix.
pub fn solve2(m: &Mat2, b: &Vec2) -> Option<Vec2> {
    let d = det2(m);
    if d == Complex64::new(0.0, 0.0) {
        return None;
    }
    Some([
        (m[1][1] * b[0] - m[0][1] * b[1]) / d,
        (m[0][0] * b[1] - m[1][0] * b[0]) / d,
    ])
}

fn radical(p: &ChainParams, theta: f64) -> f64 {
    let dc = p.c1() - p.c2();
    (dc * dc + 8.0 * p.v1.k1 * p.v2.k1 * (theta.cos() + 1.0)).sqrt()
}

pub fn omega(p: &ChainParams, branch: Branch, theta: f64) -> f64 {
    omega_sq(p, branch, theta).sqrt()
}

pub fn omega_sq(p: &ChainParams, branch: Branch, theta: f64) -> f64 {
    let s = p.c1() + p.c2();
    let r = radical(p, theta);
    match branch {
        Branch::Acoustic => 0.5 * (s - r),
        Branch::Optical => 0.5 * (s + r),
    }
}

pub fn group_velocity(p: &ChainParams, branch: Branch, theta: f64) -> f64 {
    let w = omega(p, branch, theta);
    -p.v1.k1 * p.v2.k1 * theta.sin() / (w * (2.0 * w * w - p.c1() - p.c2()))
}

/// Builds the carrier on `branch` at `theta`, with the basis-vector
/// convention whenever `|e^{i theta} + 1| < 1e-8`.
pub fn polarization(p: &ChainParams, branch: Branch, theta: f64) -> Wave {
    let w = omega(p, branch, theta);
    let w2 = w * w;
    let e1 = Complex64::from_polar(1.0, theta) + 1.0;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if e1.norm() < DEGENERATE_GUARD {
        let basis = match branch {
            Branch::Acoustic => [one, zero],
            Branch::Optical => [zero, one],
        };
        return Wave {
            branch,
            theta,
            omega: w,
            polarization: Polarization::Degenerate,
            right: basis,
            left: basis,
        };
    }
    let rho = (w2 - p.c1()) / (p.v1.k1 * e1);
    Wave {
        branch,
        theta,
        omega: w,
        polarization: Polarization::Ratio(rho),
        right: [one, -rho],
        left: [Complex64::new(w2 - p.c2(), 0.0), -p.v1.k1 * e1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p0() -> ChainParams {
        ChainParams::harmonic(1.0, 2.0, 1.0, 1.0)
    }

    prop_compose! {
        fn valid_params()(v1 in 0.2..3.0f64, v2 in 0.2..3.0f64, w1 in 0.1..3.0f64, w2 in 0.1..3.0f64)
            -> ChainParams {
            let p = ChainParams::harmonic(v1, v2, w1, w2);
            if p.c2() > p.c1() { p } else { ChainParams::harmonic(v2, v1, w2, w1) }
        }
    }

    #[test]
    fn matrix_examples() {
        let p = p0();
        let h = dispersion_matrix(&p, 0.0, 0.0);
        assert!((h[0][0] - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        assert!((h[0][1] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((h[1][0] - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        assert!((h[1][1] - Complex64::new(-5.0, 0.0)).norm() < 1e-15);
        assert!((det2(&h) - 7.0).norm() < 1e-14);
        assert!(dispersion_det(&p, 1.0, 0.0).norm() < 1e-14);
        let hp = dispersion_matrix(&p, 1.3, PI);
        assert!(hp[0][1].norm() < 1e-15 && hp[1][0].norm() < 1e-15);
    }

    #[test]
    fn frequency_examples() {
        let p = p0();
        assert_eq!(omega(&p, Branch::Acoustic, 0.0), 1.0);
        assert!((omega(&p, Branch::Acoustic, PI) - 3f64.sqrt()).abs() < 1e-15);
        assert!((omega(&p, Branch::Optical, PI) - 5f64.sqrt()).abs() < 1e-15);
        assert!((omega(&p, Branch::Optical, 0.0) - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn group_velocity_examples() {
        let p = p0();
        for b in [Branch::Acoustic, Branch::Optical] {
            assert_eq!(group_velocity(&p, b, 0.0), 0.0);
            assert!(group_velocity(&p, b, PI).abs() < 1e-15);
        }
        let v = group_velocity(&p, Branch::Acoustic, PI / 2.0);
        assert!((v - 0.336_724_002_91).abs() < 1e-10, "{v}");
        let h = 1e-5;
        let fd = (omega(&p, Branch::Acoustic, PI / 2.0 + h)
            - omega(&p, Branch::Acoustic, PI / 2.0 - h))
            / (2.0 * h);
        assert!((v - fd).abs() < 1e-8);
    }

    #[test]
    fn polarization_examples() {
        let p = p0();
        let w = polarization(&p, Branch::Acoustic, 0.0);
        assert!((w.rho().unwrap() + 1.0).norm() < 1e-15);
        let d = polarization(&p, Branch::Acoustic, PI);
        assert!(d.is_degenerate());
        assert_eq!(
            d.right,
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
        let o = polarization(&p, Branch::Optical, -PI);
        assert_eq!(
            o.right,
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        );
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(2.0 * PI) - 0.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn branches_solve_dispersion(p in valid_params(), theta in -PI..PI) {
            for b in [Branch::Acoustic, Branch::Optical] {
                let w = omega(&p, b, theta);
                prop_assert!(dispersion_det(&p, w, theta).norm() <= 1e-10 * (1.0 + w.powi(4)));
            }
        }

        #[test]
        fn null_vectors(p in valid_params(), theta in -3.1..3.1f64) {
            for b in [Branch::Acoustic, Branch::Optical] {
                let wave = polarization(&p, b, theta);
                let h = dispersion_matrix(&p, wave.omega, theta);
                let hr = mat_vec(&h, &wave.right);
                prop_assert!(hr[0].norm() < 1e-10 && hr[1].norm() < 1e-10);
                let lh0 = wave.left[0] * h[0][0] + wave.left[1] * h[1][0];
                let lh1 = wave.left[0] * h[0][1] + wave.left[1] * h[1][1];
                prop_assert!(lh0.norm() < 1e-10 && lh1.norm() < 1e-10);
                // Second quotient form of the polarization ratio.
                let rho2 = p.v2.k1 * (Complex64::from_polar(1.0, -theta) + 1.0) / (wave.omega.powi(2) - p.c2());
                prop_assert!((wave.rho().unwrap() - rho2).norm() < 1e-10 * (1.0 + rho2.norm()));
            }
        }

        #[test]
        fn evenness_and_separation(p in valid_params(), theta in 0.0..PI) {
            for b in [Branch::Acoustic, Branch::Optical] {
                prop_assert!((omega(&p, b, theta) - omega(&p, b, -theta)).abs() < 1e-14);
                prop_assert!((group_velocity(&p, b, theta) + group_velocity(&p, b, -theta)).abs() < 1e-14);
            }
            for phi in [0.0, PI - theta, PI] {
                let gap = omega_sq(&p, Branch::Optical, theta) - omega_sq(&p, Branch::Acoustic, phi);
                prop_assert!(gap >= (p.c1() - p.c2()).abs() - 1e-12);
            }
        }
    }
}
