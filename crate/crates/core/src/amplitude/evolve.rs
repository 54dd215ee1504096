use num_complex::Complex64;

use super::coupling::MacroSystem;
use super::field::AmplitudeField;
use crate::error::{Error, Result};
use crate::fourier;

/// Envelope snapshots on a uniform `tau` grid. Intermediate times are
/// reconstructed exactly (transport) or by one splitting step from a stored
/// snapshot (coupled regimes).
#[derive(Debug, Clone)]
pub struct Trajectory {
    system: MacroSystem,
    length: f64,
    step: f64,
    taus: Vec<f64>,
    snapshots: Vec<Vec<AmplitudeField>>,
}

impl Trajectory {
    pub fn system(&self) -> &MacroSystem {
        &self.system
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn snapshots(&self) -> &[Vec<AmplitudeField>] {
        &self.snapshots
    }

    pub fn final_fields(&self) -> &[AmplitudeField] {
        self.snapshots
            .last()
            .expect("trajectory holds the initial snapshot")
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn tau_end(&self) -> f64 {
        *self.taus.last().expect("non-empty")
    }

    /// Index of the snapshot a reconstruction at `tau` starts from.
    pub fn base_index(&self, tau: f64) -> usize {
        if self.taus.len() < 2 {
            return 0;
        }
        ((tau / self.step).floor().max(0.0) as usize).min(self.taus.len() - 2)
    }

    /// Fields at `tau`, within one step outside `[0, tau_end]`.
    pub fn at(&self, tau: f64) -> Result<Vec<AmplitudeField>> {
        self.at_from(tau, self.base_index(tau))
    }

    /// Fields at `tau` reconstructed from snapshot `base`. Using one base for
    /// neighbouring times keeps the result smooth in `tau`.
    pub fn at_from(&self, tau: f64, base: usize) -> Result<Vec<AmplitudeField>> {
        let slack = self.step.max(1e-12);
        if !(tau >= -slack && tau <= self.tau_end() + slack) || base >= self.snapshots.len() {
            return Err(Error::TrajectoryUnavailable { tau });
        }
        if !self.system.is_resonant() {
            return Ok(self.snapshots[0]
                .iter()
                .zip(&self.system.velocities)
                .map(|(f, &v)| f.translated(v * tau))
                .collect());
        }
        let raw: Vec<Vec<Complex64>> = self.snapshots[base]
            .iter()
            .map(|f| f.values().to_vec())
            .collect();
        let out = strang_step(&self.system, &raw, self.length, tau - self.taus[base]);
        finish(out, self.length, tau)
    }
}

fn finish(raw: Vec<Vec<Complex64>>, length: f64, tau: f64) -> Result<Vec<AmplitudeField>> {
    let fields: Vec<AmplitudeField> = raw
        .into_iter()
        .map(|v| AmplitudeField::from_raw(v, length))
        .collect();
    if fields.iter().all(|f| f.is_finite()) {
        Ok(fields)
    } else {
        Err(Error::NonFinite { t: tau })
    }
}

fn advect(sys: &MacroSystem, fields: &mut [Vec<Complex64>], length: f64, dt: f64) {
    for (f, &v) in fields.iter_mut().zip(&sys.velocities) {
        if v != 0.0 {
            *f = fourier::translate(f, length, v * dt);
        }
    }
}

/// Half transport, pointwise fourth-order Runge-Kutta on the coupling, half
/// transport.
fn strang_step(
    sys: &MacroSystem,
    fields: &[Vec<Complex64>],
    length: f64,
    h: f64,
) -> Vec<Vec<Complex64>> {
    let mut f = fields.to_vec();
    advect(sys, &mut f, length, 0.5 * h);
    let n = f[0].len();
    for j in 0..n {
        let a = [f[0][j], f[1][j]];
        let add = |x: [Complex64; 2], k: [Complex64; 2], s: f64| [x[0] + s * k[0], x[1] + s * k[1]];
        let k1 = sys.coupling(a);
        let k2 = sys.coupling(add(a, k1, 0.5 * h));
        let k3 = sys.coupling(add(a, k2, 0.5 * h));
        let k4 = sys.coupling(add(a, k3, h));
        for c in 0..2 {
            f[c][j] = a[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    advect(sys, &mut f, length, 0.5 * h);
    f
}

/// Integrates the envelope equations of `sys` from `a0` to `tau_end` with
/// steps no larger than `dtau`.
pub fn evolve(
    sys: &MacroSystem,
    a0: &[AmplitudeField],
    tau_end: f64,
    dtau: f64,
) -> Result<Trajectory> {
    if a0.len() != sys.wave_count() {
        return Err(Error::LengthMismatch {
            expected: sys.wave_count(),
            got: a0.len(),
        });
    }
    if !(dtau > 0.0) || !(tau_end >= 0.0) || !tau_end.is_finite() {
        return Err(Error::Config(format!(
            "need dtau > 0 and tau_end >= 0, got {dtau}, {tau_end}"
        )));
    }
    let (n, length) = (a0[0].len(), a0[0].length());
    if a0
        .iter()
        .any(|f| f.len() != n || (f.length() - length).abs() > 1e-12 * length)
    {
        return Err(Error::Grid("initial fields live on different grids".into()));
    }
    let steps = if tau_end == 0.0 {
        0
    } else {
        ((tau_end / dtau) - 1e-9).ceil().max(1.0) as usize
    };
    let step = if steps > 0 {
        tau_end / steps as f64
    } else {
        dtau
    };
    let taus: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { tau_end } else { step * k as f64 })
        .collect();
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(a0.to_vec());
    if sys.is_resonant() {
        let mut cur: Vec<Vec<Complex64>> = a0.iter().map(|f| f.values().to_vec()).collect();
        for &tau in &taus[1..] {
            cur = strang_step(sys, &cur, length, step);
            snapshots.push(finish(cur.clone(), length, tau)?);
        }
    } else {
        for &tau in &taus[1..] {
            snapshots.push(
                a0.iter()
                    .zip(&sys.velocities)
                    .map(|(f, &v)| f.translated(v * tau))
                    .collect(),
            );
        }
    }
    Ok(Trajectory {
        system: sys.clone(),
        length,
        step,
        taus,
        snapshots,
    })
}
