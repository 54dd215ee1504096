//! Two-scale lattice approximations built from envelope trajectories.
//!
//! A snapshot of the approximation is a list of carrier terms, each a
//! lattice-sampled vector envelope riding on `e^{i(Omega t + j Theta)}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::amplitude::{
    evolve, AmplitudeField, CarrierIndex, CorrectorPlan, MacroSystem, Trajectory,
};
use crate::error::{Error, Result};
use crate::microsim::unit_roots;
use crate::model::{linear_apply, mass_norm, nonlinear_apply, ChainParams, LatticeState};
use crate::spectrum::{Vec2, Wave};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Residual step `h = eps^2 * h0` uses this `h0` unless told otherwise.
pub const DEFAULT_H0: f64 = 0.01;

/// Lattice mode `k` with `theta = 2 pi k / cells`.
pub fn commensurate_mode(theta: f64, cells: usize) -> Result<usize> {
    let x = theta * cells as f64 / (2.0 * PI);
    let k = x.round();
    if (x - k).abs() > 1e-9 {
        return Err(Error::Incommensurate { theta, cells });
    }
    Ok((k as i64).rem_euclid(cells as i64) as usize)
}

/// Nearest commensurate wavenumber, wrapped to `(-pi, pi]`.
pub fn snap_theta(theta: f64, cells: usize) -> f64 {
    let k = (theta * cells as f64 / (2.0 * PI)).round() as i64;
    let k = k.rem_euclid(cells as i64);
    let signed = if 2 * k > cells as i64 {
        k - cells as i64
    } else {
        k
    };
    2.0 * PI * signed as f64 / cells as f64
}

/// Whether a term belongs to the leading or the corrector part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermOrder {
    First,
    Second,
}

/// One carrier contribution `amp_j e^{i(omega t + j theta)} + cc`.
///
/// `amp` already carries its power of `eps` and any weight; `damp` is its
/// `tau`-derivative where known.
#[derive(Debug, Clone)]
pub struct CarrierTerm {
    pub index: CarrierIndex,
    pub order: TermOrder,
    pub omega: f64,
    pub mode: usize,
    pub amp: Vec<Vec2>,
    pub damp: Option<Vec<Vec2>>,
}

/// The approximation at one instant, resolved on the lattice.
#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    pub eps: f64,
    pub t: f64,
    pub cells: usize,
    pub length: f64,
    pub waves: Vec<Wave>,
    pub terms: Vec<CarrierTerm>,
    roots: Vec<Complex64>,
}

impl AnsatzSpec {
    fn phase(&self, term: &CarrierTerm, j: usize) -> Complex64 {
        let n = self.cells;
        Complex64::from_polar(1.0, term.omega * self.t) * self.roots[(term.mode * j) % n]
    }

    fn sum(
        &self,
        keep: impl Fn(&CarrierTerm) -> bool,
        value: impl Fn(&CarrierTerm, usize) -> Vec2,
    ) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.cells];
        for term in self.terms.iter().filter(|t| keep(t)) {
            for (j, o) in out.iter_mut().enumerate() {
                let ph = self.phase(term, j);
                let v = value(term, j);
                o[0] += 2.0 * (v[0] * ph).re;
                o[1] += 2.0 * (v[1] * ph).re;
            }
        }
        out
    }

    /// Positions of the leading-order approximation.
    pub fn sample_first_order(&self) -> Vec<[f64; 2]> {
        self.sum(|t| t.order == TermOrder::First, |t, j| t.amp[j])
    }

    /// Positions including the second-order correctors.
    pub fn sample_improved(&self) -> Vec<[f64; 2]> {
        self.sum(|_| true, |t, j| t.amp[j])
    }

    /// Time derivative of the leading-order approximation, including the
    /// slow `eps * d_tau` contribution.
    pub fn first_order_velocity(&self) -> Vec<[f64; 2]> {
        let eps = self.eps;
        self.sum(
            |t| t.order == TermOrder::First,
            |t, j| velocity_amp(t, j, eps),
        )
    }

    /// Velocity matching [`Self::sample_improved`]: the leading part plus
    /// `i Omega` times each corrector. The `eps^3 d_tau` terms of the
    /// correctors are not included.
    pub fn initial_velocity(&self) -> Vec<[f64; 2]> {
        let eps = self.eps;
        self.sum(|_| true, |t, j| velocity_amp(t, j, eps))
    }

    pub fn first_order_state(&self) -> LatticeState {
        LatticeState {
            pos: self.sample_first_order(),
            vel: self.first_order_velocity(),
            t: self.t,
        }
    }

    pub fn improved_state(&self) -> LatticeState {
        LatticeState {
            pos: self.sample_improved(),
            vel: self.initial_velocity(),
            t: self.t,
        }
    }

    /// `max_j |u_j|` over both sublattices of the improved positions.
    pub fn improved_sup(&self) -> f64 {
        self.sample_improved()
            .iter()
            .map(|u| u[0].abs().max(u[1].abs()))
            .fold(0.0, f64::max)
    }
}

fn velocity_amp(t: &CarrierTerm, j: usize, eps: f64) -> Vec2 {
    let a = t.amp[j];
    let d = t
        .damp
        .as_ref()
        .map_or([Complex64::new(0.0, 0.0); 2], |d| d[j]);
    [
        I * t.omega * a[0] + eps * d[0],
        I * t.omega * a[1] + eps * d[1],
    ]
}

/// Envelope trajectory together with the lattice it is sampled on.
#[derive(Debug, Clone)]
pub struct Ansatz {
    params: ChainParams,
    eps: f64,
    cells: usize,
    trajectory: Trajectory,
    plan: CorrectorPlan,
    modes: Vec<usize>,
    roots: Vec<Complex64>,
}

impl Ansatz {
    /// Integrates the envelope equations of `system` from `a0` up to
    /// `tau_end` and binds the result to a lattice of `cells` cells.
    ///
    /// Requires every carrier wavenumber to be a multiple of `2 pi / cells`
    /// and the envelope domain to have length `eps * cells`.
    pub fn new(
        system: MacroSystem,
        eps: f64,
        cells: usize,
        a0: &[AmplitudeField],
        tau_end: f64,
        dtau: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        if cells < 2 {
            return Err(Error::Grid(format!("need at least two cells, got {cells}")));
        }
        let modes = system
            .waves
            .iter()
            .map(|w| commensurate_mode(w.theta, cells))
            .collect::<Result<Vec<_>>>()?;
        let length = eps * cells as f64;
        if let Some(f) = a0
            .iter()
            .find(|f| (f.length() - length).abs() > 1e-12 * length)
        {
            return Err(Error::Grid(format!(
                "envelope length {} differs from eps * cells = {length}",
                f.length()
            )));
        }
        let plan = CorrectorPlan::new(&system)?;
        let trajectory = evolve(&system, a0, tau_end, dtau)?;
        Ok(Self {
            params: system.params,
            eps,
            cells,
            trajectory,
            plan,
            modes,
            roots: unit_roots(cells),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn system(&self) -> &MacroSystem {
        self.trajectory.system()
    }

    /// Lattice mode of the carrier `index`.
    pub fn carrier_mode(&self, index: CarrierIndex) -> usize {
        let (m1, m2) = index.multiples();
        let k2 = self.modes.get(1).copied().unwrap_or(0) as i64;
        (m1 * self.modes[0] as i64 + m2 * k2).rem_euclid(self.cells as i64) as usize
    }

    /// Snapshot at lattice time `t`.
    pub fn spec_at(&self, t: f64) -> Result<AnsatzSpec> {
        let tau = self.eps * t;
        self.spec_from(t, self.trajectory.base_index(tau))
    }

    fn spec_from(&self, t: f64, base: usize) -> Result<AnsatzSpec> {
        let fields = self.trajectory.at_from(self.eps * t, base)?;
        Ok(self.spec_with_fields(t, &fields))
    }

    /// Snapshot at lattice time `t` built from given envelope fields.
    pub fn spec_with_fields(&self, t: f64, fields: &[AmplitudeField]) -> AnsatzSpec {
        let sys = self.trajectory.system();
        let (n, eps) = (self.cells, self.eps);
        let zero = Complex64::new(0.0, 0.0);
        let nw = sys.wave_count();
        let a: Vec<Vec<Complex64>> = fields.iter().map(|f| f.sample(n)).collect();
        let da: Vec<Vec<Complex64>> = fields.iter().map(|f| f.derivative().sample(n)).collect();
        let pick =
            |v: &Vec<Vec<Complex64>>, k: usize, j: usize| if k < nw { v[k][j] } else { zero };

        let indices = self.plan.indices();
        let mut second: Vec<Vec<Vec2>> = vec![Vec::with_capacity(n); indices.len()];
        let mut lead = vec![Vec::with_capacity(n); nw];
        let mut dlead = vec![Vec::with_capacity(n); nw];
        for j in 0..n {
            let aj = [pick(&a, 0, j), pick(&a, 1, j)];
            let daj = [pick(&da, 0, j), pick(&da, 1, j)];
            let dt = sys.tau_derivative(aj, daj);
            for (k, w) in sys.waves.iter().enumerate() {
                lead[k].push([eps * aj[k] * w.right[0], eps * aj[k] * w.right[1]]);
                dlead[k].push([eps * dt[k] * w.right[0], eps * dt[k] * w.right[1]]);
            }
            for (slot, v) in second.iter_mut().zip(self.plan.point(aj, daj)) {
                slot.push(v);
            }
        }

        let mut terms = Vec::with_capacity(nw + indices.len());
        for (k, (amp, damp)) in lead.into_iter().zip(dlead).enumerate() {
            let index = if k == 0 {
                CarrierIndex::First
            } else {
                CarrierIndex::Second
            };
            terms.push(CarrierTerm {
                index,
                order: TermOrder::First,
                omega: sys.waves[k].omega,
                mode: self.modes[k],
                amp,
                damp: Some(damp),
            });
        }
        for (index, vals) in indices.into_iter().zip(second) {
            let weight = if index == CarrierIndex::Mean {
                0.5
            } else {
                1.0
            } * eps
                * eps;
            let amp = vals
                .into_iter()
                .map(|v| [weight * v[0], weight * v[1]])
                .collect();
            terms.push(CarrierTerm {
                index,
                order: TermOrder::Second,
                omega: self.plan.carrier(index).0,
                mode: self.carrier_mode(index),
                amp,
                damp: None,
            });
        }
        AnsatzSpec {
            eps,
            t,
            cells: n,
            length: eps * n as f64,
            waves: sys.waves.clone(),
            terms,
            roots: self.roots.clone(),
        }
    }

    /// M-weighted `l^2` norm of `L U + M(U) - U''` for the improved
    /// approximation `U` at time `t`.
    ///
    /// Each carrier term is differentiated as `e^{i Omega t}` times a slow
    /// envelope; the envelope derivatives are central differences with step
    /// `h = eps^2 h0`, all three evaluations sharing one trajectory snapshot.
    pub fn residual_norm(&self, t: f64, h0: f64) -> Result<f64> {
        if !(h0 > 0.0) {
            return Err(Error::Config(format!(
                "residual step factor must be positive, got {h0}"
            )));
        }
        let h = self.eps * self.eps * h0;
        let base = self.trajectory.base_index(self.eps * t);
        let mid = self.spec_from(t, base)?;
        let plus = self.spec_from(t + h, base)?;
        let minus = self.spec_from(t - h, base)?;
        let u = mid.sample_improved();
        let mut acc = vec![[0.0; 2]; self.cells];
        for ((tm, tp), tn) in mid.terms.iter().zip(&plus.terms).zip(&minus.terms) {
            let om = tm.omega;
            for (j, out) in acc.iter_mut().enumerate() {
                let ph = mid.phase(tm, j);
                for c in 0..2 {
                    let (b0, bp, bn) = (tm.amp[j][c], tp.amp[j][c], tn.amp[j][c]);
                    let dd =
                        -om * om * b0 + I * om * (bp - bn) / h + (bp - 2.0 * b0 + bn) / (h * h);
                    out[c] += 2.0 * (dd * ph).re;
                }
            }
        }
        let lin = linear_apply(&self.params, &u);
        let nl = nonlinear_apply(&self.params, &u);
        let res: Vec<[f64; 2]> = (0..self.cells)
            .map(|j| {
                [
                    lin[j][0] + nl[j][0] - acc[j][0],
                    lin[j][1] + nl[j][1] - acc[j][1],
                ]
            })
            .collect();
        Ok(mass_norm(&res, &self.params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microsim::{integrate, SimConfig};
    use crate::model::PotentialCoeffs;
    use crate::resonance::family_params;
    use crate::spectrum::{omega, Branch};

    fn p0() -> ChainParams {
        ChainParams::harmonic(1.0, 2.0, 1.0, 1.0)
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn single(
        p: &ChainParams,
        branch: Branch,
        k: usize,
        eps: f64,
        cells: usize,
        f: AmplitudeField,
    ) -> Ansatz {
        let w = Wave::new(p, branch, 2.0 * PI * k as f64 / cells as f64);
        let sys = MacroSystem::non_resonant(p, vec![w]).unwrap();
        Ansatz::new(sys, eps, cells, &[f], 1.0, 1e-2).unwrap()
    }

    #[test]
    fn constant_wave_at_zero_wavenumber() {
        let p = p0();
        let (eps, n, a) = (0.1, 64, 0.7);
        assert!((omega(&p, Branch::Acoustic, 0.0) - 1.0).abs() < 1e-14);
        let f = AmplitudeField::constant(16, eps * n as f64, c(a)).unwrap();
        let an = single(&p, Branch::Acoustic, 0, eps, n, f);
        for t in [0.0, 0.4, 3.0] {
            let u = an.spec_at(t).unwrap().sample_first_order();
            let expect = 2.0 * eps * a * t.cos();
            assert!(u
                .iter()
                .all(|x| (x[0] - expect).abs() < 1e-14 && (x[1] - expect).abs() < 1e-14));
        }
    }

    #[test]
    fn zero_fields_give_zero_state() {
        let p = p0();
        let f = AmplitudeField::zeros(32, 0.05 * 128.0).unwrap();
        let w = Wave::new(&p, Branch::Acoustic, 2.0 * PI * 3.0 / 128.0);
        let sys = MacroSystem::non_resonant(&p, vec![w]).unwrap();
        let an = Ansatz::new(sys, 0.05, 128, &[f], 0.5, 1e-2).unwrap();
        let s = an.spec_at(2.0).unwrap();
        assert!(s
            .sample_improved()
            .iter()
            .chain(&s.initial_velocity())
            .all(|u| *u == [0.0, 0.0]));
        assert_eq!(an.residual_norm(2.0, DEFAULT_H0).unwrap(), 0.0);
    }

    #[test]
    fn commensurability_and_length_are_enforced() {
        let p = p0();
        let w = Wave::new(&p, Branch::Acoustic, 0.3);
        let sys = MacroSystem::non_resonant(&p, vec![w]).unwrap();
        let f = AmplitudeField::zeros(16, 6.4).unwrap();
        assert!(matches!(
            Ansatz::new(sys, 0.1, 64, std::slice::from_ref(&f), 1.0, 0.1),
            Err(Error::Incommensurate { .. })
        ));
        let w = Wave::new(&p, Branch::Acoustic, snap_theta(0.3, 64));
        let sys = MacroSystem::non_resonant(&p, vec![w]).unwrap();
        assert!(Ansatz::new(sys.clone(), 0.1, 64, &[f], 1.0, 0.1).is_ok());
        let g = AmplitudeField::zeros(16, 6.0).unwrap();
        assert!(matches!(
            Ansatz::new(sys, 0.1, 64, &[g], 1.0, 0.1),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn linear_plane_wave_velocity_and_residual() {
        let p = p0();
        let (eps, n, k, a) = (0.05, 256, 9, 0.4);
        let theta = 2.0 * PI * k as f64 / n as f64;
        let f = AmplitudeField::constant(32, eps * n as f64, c(a)).unwrap();
        let an = single(&p, Branch::Acoustic, k, eps, n, f);
        let w = Wave::new(&p, Branch::Acoustic, theta);
        let s = an.spec_at(0.0).unwrap();
        let v = s.initial_velocity();
        for (j, vj) in v.iter().enumerate() {
            let e = I * w.omega * Complex64::from_polar(eps * a, theta * j as f64);
            for comp in 0..2 {
                assert!((vj[comp] - 2.0 * (e * w.right[comp]).re).abs() < 1e-12);
            }
        }
        assert_eq!(s.sample_improved(), s.sample_first_order());
        for t in [0.0, 1.3, 7.0] {
            assert!(an.residual_norm(t, DEFAULT_H0).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn lattice_follows_linear_plane_wave() {
        let p = p0();
        let (eps, n, k) = (0.1, 64, 4);
        let f = AmplitudeField::constant(16, eps * n as f64, c(0.3)).unwrap();
        let an = single(&p, Branch::Optical, k, eps, n, f);
        let s0 = an.spec_at(0.0).unwrap().improved_state();
        let s = integrate(&p, &s0, &SimConfig::new(2e-3, 10.0, 1_000_000), |_| {}).unwrap();
        let exact = an.spec_at(10.0).unwrap().sample_first_order();
        let err = s
            .pos
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err:e}");
    }

    #[test]
    fn residual_is_small_for_modulated_nonlinear_wave() {
        let mut p = p0();
        p.v1 = PotentialCoeffs::new(1.0, 0.5, 0.2);
        p.w1 = PotentialCoeffs::new(1.0, -0.3, 0.1);
        p.w2 = PotentialCoeffs::new(1.0, 0.4, 0.0);
        let res = |eps: f64| {
            let n = (40.0 / eps).round() as usize;
            let f = AmplitudeField::sech(128, eps * n as f64, c(1.0), 1.0).unwrap();
            let k = (0.3 * n as f64 / (2.0 * PI)).round() as usize;
            let an = single(&p, Branch::Acoustic, k, eps, n, f);
            an.residual_norm(0.5 / eps, DEFAULT_H0).unwrap()
        };
        let (r1, r2) = (res(0.1), res(0.05));
        let slope = (r1 / r2).log2();
        assert!(slope > 2.3, "slope {slope}, {r1:e} {r2:e}");
    }

    #[test]
    fn resonant_terms_use_doubled_modes() {
        let p = family_params(1.0, 2.0, 2.0);
        let n = 128;
        let w1 = Wave::new(&p, Branch::Acoustic, 0.0);
        let w2 = Wave::new(&p, Branch::Optical, 0.0);
        let sys = MacroSystem::resonant(&p, w1, w2).unwrap();
        let f = AmplitudeField::sech(32, 0.1 * n as f64, c(1.0), 1.0).unwrap();
        let an = Ansatz::new(sys, 0.1, n, &[f.clone(), f], 0.2, 1e-2).unwrap();
        let s = an.spec_at(1.0).unwrap();
        let om: Vec<f64> = s.terms.iter().map(|t| t.omega).collect();
        let w = 2f64.sqrt();
        let expect = [w, 2.0 * w, w, 2.0 * w, 4.0 * w, 3.0 * w, 0.0];
        assert_eq!(om.len(), expect.len());
        for (a, b) in om.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
