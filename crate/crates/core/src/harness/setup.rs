use num_complex::Complex64;

use super::config::{EnvelopeShape, ExperimentConfig, FamilySpec, Profile, WaveSelection};
use crate::amplitude::{AmplitudeField, MacroSystem};
use crate::ansatz::{snap_theta, Ansatz};
use crate::error::{Error, Result};
use crate::microsim::SimConfig;
use crate::model::ChainParams;
use crate::resonance::{check_nonresonance, family_params, solve_family_ratio, ResonanceMode};
use crate::spectrum::{wrap_angle, Branch, Wave};

/// One lattice realization of a configured wave setup at a given `eps`.
#[derive(Debug, Clone)]
pub struct Setup {
    pub eps: f64,
    pub cells: usize,
    pub params: ChainParams,
    pub system: MacroSystem,
    pub fields: Vec<AmplitudeField>,
}

impl Setup {
    pub fn length(&self) -> f64 {
        self.eps * self.cells as f64
    }

    pub fn ansatz(&self, tau_end: f64, dtau: f64) -> Result<Ansatz> {
        Ansatz::new(
            self.system.clone(),
            self.eps,
            self.cells,
            &self.fields,
            tau_end,
            dtau,
        )
    }
}

/// Number of cells `round(L / eps)` for nominal length `L`.
pub fn cells_for(eps: f64, length: f64) -> usize {
    (length / eps).round().max(2.0) as usize
}

/// Lattice step for runs whose error is compared against `eps^{3/2}`:
/// the configured value or `min(default, 0.02 eps)`.
pub fn fine_dt(cfg: &ExperimentConfig, p: &ChainParams, eps: f64) -> f64 {
    cfg.numerics
        .dt
        .unwrap_or_else(|| SimConfig::default_dt(p).min(0.02 * eps))
}

fn envelope(
    shape: &EnvelopeShape,
    n: usize,
    length: f64,
    scale: Complex64,
) -> Result<AmplitudeField> {
    let amp = scale * shape.amplitude;
    match shape.profile {
        Profile::Sech => AmplitudeField::sech(n, length, amp, shape.width),
        Profile::Constant => AmplitudeField::constant(n, length, amp),
    }
}

/// Family chain with exact resonance at the snapped acoustic wavenumber.
/// Linear coefficients come from the family, higher ones from `base`.
pub fn family_chain(
    base: &ChainParams,
    f: &FamilySpec,
    cells: usize,
) -> Result<(ChainParams, Wave, Wave)> {
    let theta1 = snap_theta((2.0 * f.c - 1.0).clamp(-1.0, 1.0).acos(), cells);
    let c = 0.5 * (1.0 + theta1.cos());
    let ratio = solve_family_ratio(f.gamma, c)?.ok_or_else(|| {
        Error::Config(format!(
            "no resonant family member for gamma={}, c={c}",
            f.gamma
        ))
    })?;
    let lin = family_params(f.a, f.gamma, f.a * ratio);
    let mut p = *base;
    p.v1.k1 = lin.v1.k1;
    p.v2.k1 = lin.v2.k1;
    p.w1.k1 = lin.w1.k1;
    p.w2.k1 = lin.w2.k1;
    p.validate()?;
    let w1 = Wave::new(&p, Branch::Acoustic, theta1);
    let w2 = Wave::new(&p, Branch::Optical, wrap_angle(2.0 * theta1));
    let mismatch = 2.0 * w1.omega - w2.omega;
    if mismatch.abs() > 1e-12 * (1.0 + w2.omega) {
        return Err(Error::Domain(format!(
            "re-solved family misses resonance by {mismatch:e}"
        )));
    }
    Ok((p, w1, w2))
}

/// Builds the envelope system and initial fields of `cfg` on the lattice
/// for `eps`, snapping carrier wavenumbers to the lattice.
pub fn build_setup(cfg: &ExperimentConfig, eps: f64) -> Result<Setup> {
    let cells = cells_for(eps, cfg.numerics.domain_length);
    let length = eps * cells as f64;
    let n = cfg.numerics.grid_points;
    let waves = cfg
        .waves
        .as_ref()
        .ok_or_else(|| Error::Config("no wave selection".into()))?;
    match waves {
        WaveSelection::Carriers(list) => {
            let p = cfg.params;
            let ws: Vec<Wave> = list
                .iter()
                .map(|c| Wave::new(&p, c.branch, snap_theta(c.theta, cells)))
                .collect();
            check_nonresonance(
                &p,
                &ws[0],
                ws.last().expect("non-empty"),
                ResonanceMode::NonResonant,
            )?;
            let fields = list
                .iter()
                .map(|c| {
                    envelope(
                        &cfg.envelope,
                        n,
                        length,
                        Complex64::new(c.amplitude[0], c.amplitude[1]),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let system = MacroSystem::non_resonant(&p, ws)?;
            Ok(Setup {
                eps,
                cells,
                params: p,
                system,
                fields,
            })
        }
        WaveSelection::ResonantFamily(f) => {
            let (p, w1, w2) = family_chain(&cfg.params, f, cells)?;
            check_nonresonance(&p, &w1, &w2, ResonanceMode::Resonant)?;
            let fields = f
                .amplitudes
                .iter()
                .map(|&a| envelope(&cfg.envelope, n, length, Complex64::new(a, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            let system = MacroSystem::resonant(&p, w1, w2)?;
            Ok(Setup {
                eps,
                cells,
                params: p,
                system,
                fields,
            })
        }
    }
}
