//! Kick-drift-kick leapfrog integration of the full lattice and modal
//! diagnostics of its solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::model::{
    acceleration_into, hamiltonian_energy, jacobian_apply, ChainParams, LatticeState,
};
use crate::spectrum::{omega, Branch, Wave};

/// Time step bound, final time and observer stride of one run.
///
/// `dt` is an upper bound: the run takes `ceil(t_end/dt)` equal steps that
/// end exactly at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, stride: usize) -> Self {
        Self { dt, t_end, stride }
    }

    /// `min(0.02, 0.1 / omega_max)`.
    pub fn default_dt(p: &ChainParams) -> f64 {
        0.02f64.min(0.1 / omega_max(p))
    }

    pub fn validate(&self, p: &ChainParams) -> Result<()> {
        let bound = 0.2 / omega_max(p);
        if !(self.dt > 0.0) || self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "time step {} outside (0, {bound}]",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "final time {} must be finite and >= 0",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::Config("observer stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn step_size(&self) -> f64 {
        match self.steps() {
            0 => self.dt,
            n => self.t_end / n as f64,
        }
    }
}

/// Advances `u'' = Lu + M(u)` from `s0` over `cfg.t_end`, calling
/// `observer` on the initial state and after every `cfg.stride` steps.
pub fn integrate<F>(
    p: &ChainParams,
    s0: &LatticeState,
    cfg: &SimConfig,
    mut observer: F,
) -> Result<LatticeState>
where
    F: FnMut(&LatticeState),
{
    cfg.validate(p)?;
    let steps = cfg.steps();
    let h = cfg.step_size();
    let t0 = s0.t;
    let mut s = s0.clone();
    if s.pos.len() != s.vel.len() {
        return Err(Error::LengthMismatch {
            expected: s.pos.len(),
            got: s.vel.len(),
        });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut acc = vec![[0.0; 2]; s.pos.len()];
    acceleration_into(p, &s.pos, &mut acc);
    observer(&s);
    for k in 1..=steps {
        for (v, a) in s.vel.iter_mut().zip(&acc) {
            v[0] += 0.5 * h * a[0];
            v[1] += 0.5 * h * a[1];
        }
        for (u, v) in s.pos.iter_mut().zip(&s.vel) {
            u[0] += h * v[0];
            u[1] += h * v[1];
        }
        acceleration_into(p, &s.pos, &mut acc);
        for (v, a) in s.vel.iter_mut().zip(&acc) {
            v[0] += 0.5 * h * a[0];
            v[1] += 0.5 * h * a[1];
        }
        s.t = if k == steps {
            t0 + cfg.t_end
        } else {
            t0 + k as f64 * h
        };
        let observe = k % cfg.stride == 0;
        if (observe || k % 64 == 0 || k == steps) && !s.is_finite() {
            return Err(Error::NonFinite { t: s.t });
        }
        if observe {
            observer(&s);
        }
    }
    Ok(s)
}

/// Largest linear frequency of the lattice, attained by the optical branch
/// at `theta = 0` or `theta = pi`.
pub fn omega_max(p: &ChainParams) -> f64 {
    omega(p, Branch::Optical, 0.0).max(omega(p, Branch::Optical, PI))
}

fn mode_index(theta: f64, cells: usize) -> Result<usize> {
    let x = theta * cells as f64 / (2.0 * PI);
    let k = x.round();
    if (x - k).abs() > 1e-9 {
        return Err(Error::Incommensurate { theta, cells });
    }
    Ok((k as i64).rem_euclid(cells as i64) as usize)
}

/// `e^{2 pi i m / N}` for `m = 0..N`.
pub(crate) fn unit_roots(cells: usize) -> Vec<Complex64> {
    (0..cells)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / cells as f64))
        .collect()
}

/// `|N^{-1} sum_j u_{j,c} e^{-i j theta}|` for sublattice `component` (1 or 2).
pub fn modal_mass(pos: &[[f64; 2]], theta: f64, component: usize) -> Result<f64> {
    if !(component == 1 || component == 2) {
        return Err(Error::Domain(format!(
            "component must be 1 or 2, got {component}"
        )));
    }
    let n = pos.len();
    let k = mode_index(theta, n)?;
    let roots = unit_roots(n);
    let sum: Complex64 = pos
        .iter()
        .enumerate()
        .map(|(j, u)| u[component - 1] * roots[(n - (k * j) % n) % n])
        .sum();
    Ok(sum.norm() / n as f64)
}

/// Positive-frequency amplitude of `branch` in every lattice Fourier mode.
///
/// Mode `m` of positions and velocities is projected on the branch
/// eigenvector with the left null vector, and the part oscillating as
/// `e^{+i omega t}` is kept. A single carrier `a r e^{i(omega t + j theta)} + cc`
/// yields `N a e^{i omega t}` at its mode.
pub fn branch_spectrum(p: &ChainParams, s: &LatticeState, branch: Branch) -> Vec<Complex64> {
    let n = s.cells();
    let split = |sel: fn(&[f64; 2]) -> f64, src: &[[f64; 2]]| -> Vec<Complex64> {
        fourier::forward(
            &src.iter()
                .map(|u| Complex64::new(sel(u), 0.0))
                .collect::<Vec<_>>(),
        )
    };
    let (u1, u2) = (split(|u| u[0], &s.pos), split(|u| u[1], &s.pos));
    let (v1, v2) = (split(|u| u[0], &s.vel), split(|u| u[1], &s.vel));
    (0..n)
        .map(|m| {
            let theta = 2.0 * PI * fourier::signed_mode(m, n) as f64 / n as f64;
            let w = Wave::new(p, branch, theta);
            let lr = w.left_dot_right();
            let c = (w.left[0] * u1[m] + w.left[1] * u2[m]) / lr;
            let dc = (w.left[0] * v1[m] + w.left[1] * v2[m]) / lr;
            0.5 * (c - Complex64::new(0.0, 1.0) * dc / w.omega)
        })
        .collect()
}

/// `|N^{-1} P(theta)|` for the positive-frequency branch amplitude `P`.
pub fn branch_modal_mass(
    p: &ChainParams,
    s: &LatticeState,
    branch: Branch,
    theta: f64,
) -> Result<f64> {
    let k = mode_index(theta, s.cells())?;
    Ok(branch_spectrum(p, s, branch)[k].norm() / s.cells() as f64)
}

/// Envelope of the carrier `wave` at lattice points: the branch content in
/// modes within `band` of the carrier mode, demodulated by
/// `e^{-i(omega t + j theta)}`.
pub fn branch_envelope(
    p: &ChainParams,
    s: &LatticeState,
    wave: &Wave,
    band: usize,
) -> Result<Vec<Complex64>> {
    let n = s.cells();
    let k = mode_index(wave.theta, n)?;
    let spec = branch_spectrum(p, s, wave.branch);
    let mut kept = vec![Complex64::new(0.0, 0.0); n];
    for (m, v) in spec.iter().enumerate() {
        let off = fourier::signed_mode((m + n - k) % n, n);
        if (off.unsigned_abs() as usize) < band {
            kept[m] = *v;
        }
    }
    let field = fourier::inverse(&kept);
    let roots = unit_roots(n);
    let time = Complex64::from_polar(1.0, -wave.omega * s.t);
    Ok(field
        .iter()
        .enumerate()
        .map(|(j, f)| f * time * roots[(n - (k * j) % n) % n])
        .collect())
}

/// Modified energy of the leapfrog scheme, conserved to fourth order in the
/// step for parameters where [`ChainParams::is_hamiltonian`] holds.
pub fn shadow_energy(p: &ChainParams, s: &LatticeState, dt: f64) -> f64 {
    let mu = p.v1.k1 / p.v2.k1;
    let mut acc = vec![[0.0; 2]; s.cells()];
    acceleration_into(p, &s.pos, &mut acc);
    let jv = jacobian_apply(p, &s.pos, &s.vel);
    let dot = |a: &[[f64; 2]], b: &[[f64; 2]]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x[0] * y[0] + mu * x[1] * y[1])
            .sum::<f64>()
    };
    hamiltonian_energy(s, p) + dt * dt * (-dot(&s.vel, &jv) / 12.0 - dot(&acc, &acc) / 24.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linear_apply, nonlinear_apply, PotentialCoeffs};
    use crate::spectrum::polarization;

    #[test]
    fn omega_max_of_p0() {
        assert!((omega_max(&p0()) - 7f64.sqrt()).abs() < 1e-14);
    }

    fn p0() -> ChainParams {
        ChainParams::harmonic(1.0, 2.0, 1.0, 1.0)
    }

    fn plane_wave(
        p: &ChainParams,
        branch: Branch,
        k: usize,
        cells: usize,
        amp: f64,
        t: f64,
    ) -> LatticeState {
        let theta = 2.0 * PI * k as f64 / cells as f64;
        let w = polarization(p, branch, theta);
        let mut s = LatticeState::zeros(cells);
        for j in 0..cells {
            let e = Complex64::from_polar(amp, w.omega * t + theta * j as f64);
            let de = Complex64::new(0.0, w.omega) * e;
            for c in 0..2 {
                s.pos[j][c] = 2.0 * (w.right[c] * e).re;
                s.vel[j][c] = 2.0 * (w.right[c] * de).re;
            }
        }
        s.t = t;
        s
    }

    #[test]
    fn zero_is_fixed() {
        let p = p0();
        let s = integrate(
            &p,
            &LatticeState::zeros(8),
            &SimConfig::new(0.02, 5.0, 10),
            |_| {},
        )
        .unwrap();
        assert!(s.pos.iter().chain(&s.vel).all(|u| *u == [0.0, 0.0]));
        assert!((s.t - 5.0).abs() < 1e-15);
    }

    #[test]
    fn observer_cadence() {
        let p = p0();
        let mut times = Vec::new();
        integrate(
            &p,
            &LatticeState::zeros(4),
            &SimConfig::new(0.01, 1.0, 25),
            |s| times.push(s.t),
        )
        .unwrap();
        assert_eq!(times.len(), 5);
        assert!((times[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_bound_is_enforced() {
        let p = p0();
        assert!(SimConfig::new(0.1, 1.0, 1).validate(&p).is_err());
        assert!(SimConfig::new(SimConfig::default_dt(&p), 1.0, 1)
            .validate(&p)
            .is_ok());
        assert!(SimConfig::new(0.02, 1.0, 0).validate(&p).is_err());
    }

    #[test]
    fn blow_up_aborts() {
        let mut p = p0();
        p.w1 = PotentialCoeffs::new(1.0, 0.0, -5.0);
        let mut s = LatticeState::zeros(4);
        s.pos[0][0] = 3.0;
        let err = integrate(&p, &s, &SimConfig::new(0.02, 100.0, 1000), |_| {}).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn force_matches_model_operators() {
        let mut p = p0();
        p.v1 = PotentialCoeffs::new(1.0, 0.3, -0.2);
        p.w2 = PotentialCoeffs::new(1.0, -0.4, 0.1);
        let pos: Vec<[f64; 2]> = (0..7)
            .map(|j| [0.1 * j as f64, -0.05 * (j * j) as f64])
            .collect();
        let mut acc = vec![[0.0; 2]; 7];
        acceleration_into(&p, &pos, &mut acc);
        let l = linear_apply(&p, &pos);
        let m = nonlinear_apply(&p, &pos);
        for j in 0..7 {
            assert_eq!(acc[j], [l[j][0] + m[j][0], l[j][1] + m[j][1]]);
        }
    }

    #[test]
    fn modal_mass_examples() {
        let n = 32;
        let k0 = 3;
        let th0 = 2.0 * PI * k0 as f64 / n as f64;
        let pos: Vec<[f64; 2]> = (0..n)
            .map(|j| [2.0 * (th0 * j as f64).cos(), 0.0])
            .collect();
        assert!((modal_mass(&pos, th0, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!(modal_mass(&pos, 2.0 * PI * 5.0 / n as f64, 1).unwrap() < 1e-14);
        assert_eq!(modal_mass(&vec![[0.0; 2]; n], th0, 2).unwrap(), 0.0);
        assert!(matches!(
            modal_mass(&pos, 0.3, 1),
            Err(Error::Incommensurate { .. })
        ));

        let pos: Vec<[f64; 2]> = (0..n)
            .map(|j| [((j * 7919) % 13) as f64 - 6.0, 0.0])
            .collect();
        let total: f64 = (0..n)
            .map(|m| {
                modal_mass(&pos, 2.0 * PI * m as f64 / n as f64, 1)
                    .unwrap()
                    .powi(2)
            })
            .sum();
        let direct: f64 = pos.iter().map(|u| u[0] * u[0]).sum::<f64>() / n as f64;
        assert!((total - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn branch_projection_separates_carriers() {
        let p = p0();
        let n = 64;
        let mut s = plane_wave(&p, Branch::Acoustic, 5, n, 0.3, 1.7);
        let o = plane_wave(&p, Branch::Optical, 5, n, 0.2, 1.7);
        for j in 0..n {
            for c in 0..2 {
                s.pos[j][c] += o.pos[j][c];
                s.vel[j][c] += o.vel[j][c];
            }
        }
        let th = 2.0 * PI * 5.0 / n as f64;
        assert!((branch_modal_mass(&p, &s, Branch::Acoustic, th).unwrap() - 0.3).abs() < 1e-13);
        assert!((branch_modal_mass(&p, &s, Branch::Optical, th).unwrap() - 0.2).abs() < 1e-13);
        assert!(branch_modal_mass(&p, &s, Branch::Optical, -th).unwrap() < 1e-13);
        let w = Wave::new(&p, Branch::Optical, th);
        let env = branch_envelope(&p, &s, &w, 4).unwrap();
        assert!(env.iter().all(|e| (e - 0.2).norm() < 1e-12));
    }

    #[test]
    fn linear_plane_wave_second_order() {
        let p = p0();
        let n = 32;
        let t_end = 10.0;
        let exact = plane_wave(&p, Branch::Acoustic, 3, n, 0.1, t_end);
        let err = |dt: f64| {
            let s0 = plane_wave(&p, Branch::Acoustic, 3, n, 0.1, 0.0);
            let s = integrate(&p, &s0, &SimConfig::new(dt, t_end, 1_000_000), |_| {}).unwrap();
            s.pos
                .iter()
                .zip(&exact.pos)
                .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
                .fold(0.0, f64::max)
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.6..=4.4).contains(&ratio), "{ratio}");
    }

    #[test]
    fn shadow_energy_is_flat() {
        let mut p = p0();
        p.v2 = PotentialCoeffs::new(2.0, 0.4, 0.2);
        p.v1 = PotentialCoeffs::new(1.0, 0.2, 0.1);
        p.w1 = PotentialCoeffs::new(1.0, -0.3, 0.1);
        p.w2 = PotentialCoeffs::new(1.0, 0.25, 0.05);
        assert!(p.is_hamiltonian());
        let mut s = plane_wave(&p, Branch::Acoustic, 2, 16, 0.05, 0.0);
        s.pos[3][0] += 0.02;
        let dt = 0.02;
        let h0 = shadow_energy(&p, &s, dt);
        let e0 = hamiltonian_energy(&s, &p);
        let (mut worst, mut raw) = (0.0f64, 0.0f64);
        integrate(&p, &s, &SimConfig::new(dt, 50.0, 1), |st| {
            worst = worst.max(((shadow_energy(&p, st, dt) - h0) / h0).abs());
            raw = raw.max(((hamiltonian_energy(st, &p) - e0) / e0).abs());
        })
        .unwrap();
        assert!(worst < 1e-6, "shadow {worst:e}, raw {raw:e}");
        assert!(raw > 10.0 * worst);
    }
}
