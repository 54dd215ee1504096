use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{ScalingReport, ScalingRow};
use super::setup::{build_setup, fine_dt, Setup};
use crate::error::Result;
use crate::microsim::{integrate, SimConfig};
use crate::model::{energy_norm, l2_norm, LatticeState};

fn sweep(
    cfg: &ExperimentConfig,
    f: impl Fn(f64) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<Vec<f64>>> {
    cfg.eps.par_iter().map(|&e| f(e)).collect()
}

fn rows(cfg: &ExperimentConfig, vals: &[Vec<f64>], k: usize) -> Vec<ScalingRow> {
    cfg.eps
        .iter()
        .zip(vals)
        .map(|(&eps, v)| ScalingRow { eps, value: v[k] })
        .collect()
}

/// Sup over sampled times of the `(l^2)^4` distance between the lattice
/// solution started from the improved approximation and the leading-order
/// approximation, over `t in [0, tau0/eps]`.
pub fn convergence_error(cfg: &ExperimentConfig, eps: f64) -> Result<f64> {
    let setup = build_setup(cfg, eps)?;
    let ansatz = setup.ansatz(cfg.tau0, cfg.numerics.dtau)?;
    let s0 = ansatz.spec_at(0.0)?.improved_state();
    let t_end = cfg.tau0 / eps;
    let samples = cfg.numerics.samples;
    let dt = fine_dt(cfg, &setup.params, eps);
    let steps = ((t_end / dt).ceil() as usize).div_ceil(samples) * samples;
    let sim = SimConfig::new(t_end / steps as f64, t_end, steps / samples);
    let mut sup = 0.0f64;
    let mut failure = None;
    integrate(&setup.params, &s0, &sim, |s: &LatticeState| {
        if failure.is_some() {
            return;
        }
        match ansatz.spec_at(s.t) {
            Ok(spec) => {
                let a = spec.first_order_state();
                let du: Vec<[f64; 2]> = s
                    .pos
                    .iter()
                    .zip(&a.pos)
                    .map(|(x, y)| [x[0] - y[0], x[1] - y[1]])
                    .collect();
                let dv: Vec<[f64; 2]> = s
                    .vel
                    .iter()
                    .zip(&a.vel)
                    .map(|(x, y)| [x[0] - y[0], x[1] - y[1]])
                    .collect();
                sup = sup.max(l2_norm(&du, &dv));
            }
            Err(e) => failure = Some(e),
        }
    })?;
    failure.map_or(Ok(sup), Err)
}

/// Error exponent of the lattice against the leading-order approximation.
/// Passes when the exponent reaches `beta - 0.2` with fit residual at most
/// 0.1.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    let vals = sweep(cfg, |e| convergence_error(cfg, e).map(|v| vec![v]))?;
    let r = ScalingReport::fitted(
        "convergence",
        "error",
        rows(cfg, &vals, 0),
        cfg.numerics.noise_floor,
    );
    let target = cfg.beta - 0.2;
    let ok = r.exponent >= target && r.fit_residual <= 0.1;
    Ok(r.with_verdict(
        format!("need exponent >= {target:.2} and fit residual <= 0.1"),
        ok,
    ))
}

/// Phases per fast period at which sup-type measures are sampled.
const PHASES: usize = 32;

/// Lattice times `tau_k / eps + s T / PHASES` for `tau_k in {0, tau0/4, ...,
/// tau0}` and `s < PHASES`, where `T` is the period of the slowest carrier.
/// Sampling a whole period matters when carriers share a lattice mode and
/// interfere.
fn sample_times(cfg: &ExperimentConfig, setup: &Setup) -> Vec<f64> {
    let period = fast_period(setup);
    let mut out = Vec::with_capacity(5 * PHASES);
    for k in 0..=4 {
        let t0 = cfg.tau0 * k as f64 / 4.0 / setup.eps;
        out.extend((0..PHASES).map(|s| t0 + period * s as f64 / PHASES as f64));
    }
    out
}

fn fast_period(setup: &Setup) -> f64 {
    let w = setup
        .system
        .waves
        .iter()
        .map(|w| w.omega)
        .fold(f64::INFINITY, f64::min);
    2.0 * std::f64::consts::PI / w
}

/// Approximation whose trajectory covers every sample time.
fn sampled_ansatz(cfg: &ExperimentConfig, setup: &Setup) -> Result<crate::ansatz::Ansatz> {
    setup.ansatz(cfg.tau0 + setup.eps * fast_period(setup), cfg.numerics.dtau)
}

/// Sup over the sample times of the residual at `h0` and at `2 h0`.
pub fn residual_pair(cfg: &ExperimentConfig, eps: f64) -> Result<Vec<f64>> {
    let setup = build_setup(cfg, eps)?;
    let ansatz = sampled_ansatz(cfg, &setup)?;
    let h0 = cfg.numerics.h0;
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for t in sample_times(cfg, &setup) {
        r1 = r1.max(ansatz.residual_norm(t, h0)?);
        r2 = r2.max(ansatz.residual_norm(t, 2.0 * h0)?);
    }
    Ok(vec![r1, r2])
}

/// Residual of the improved approximation; passes when its exponent is at
/// least 2.4.
pub fn run_residual_scaling(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    let vals = sweep(cfg, |e| residual_pair(cfg, e))?;
    let mut r = ScalingReport::fitted(
        "residual_scaling",
        "residual",
        rows(cfg, &vals, 0),
        cfg.numerics.noise_floor,
    );
    let sens = vals
        .iter()
        .map(|v| {
            if v[0] > 0.0 {
                (v[1] / v[0] - 1.0).abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let norm: Vec<f64> = cfg
        .eps
        .iter()
        .zip(&vals)
        .map(|(e, v)| v[0] / e.powf(2.5))
        .collect();
    r.push_extra("h0_doubling_change", sens);
    r.push_extra(
        "residual_over_eps2.5_max",
        norm.iter().cloned().fold(0.0, f64::max),
    );
    let ok = r.exponent >= 2.4;
    Ok(r.with_verdict("need exponent >= 2.4", ok))
}

/// `(gap, sup-norm / eps)`, each a sup over the sample times.
pub fn ansatz_measures(cfg: &ExperimentConfig, eps: f64) -> Result<Vec<f64>> {
    let setup = build_setup(cfg, eps)?;
    let ansatz = sampled_ansatz(cfg, &setup)?;
    let (mut gap, mut linf) = (0.0f64, 0.0f64);
    for t in sample_times(cfg, &setup) {
        let spec = ansatz.spec_at(t)?;
        let a = spec.first_order_state();
        let b = spec.improved_state();
        let d = LatticeState {
            pos: a
                .pos
                .iter()
                .zip(&b.pos)
                .map(|(x, y)| [y[0] - x[0], y[1] - x[1]])
                .collect(),
            vel: a
                .vel
                .iter()
                .zip(&b.vel)
                .map(|(x, y)| [y[0] - x[0], y[1] - x[1]])
                .collect(),
            t: spec.t,
        };
        gap = gap.max(energy_norm(&d, &setup.params));
        linf = linf.max(spec.improved_sup() / eps);
    }
    Ok(vec![gap, linf])
}

/// Gap between the improved and leading-order approximations in the energy
/// norm, and their sup norm over `eps`. Passes when the gap exponent is
/// within 0.1 of 1.5 and `sup / eps` varies by at most a factor 2.
pub fn run_ansatz_scaling(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    let vals = sweep(cfg, |e| ansatz_measures(cfg, e))?;
    let mut r = ScalingReport::fitted(
        "ansatz_scaling",
        "gap",
        rows(cfg, &vals, 0),
        cfg.numerics.noise_floor,
    );
    let linf: Vec<f64> = vals.iter().map(|v| v[1]).collect();
    let (lo, hi) = linf.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    r.push_extra("linf_over_eps_min", lo);
    r.push_extra("linf_over_eps_max", hi);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    r.push_extra("linf_over_eps_spread", spread);
    let ok = (r.exponent - 1.5).abs() <= 0.1 && spread <= 2.0;
    Ok(r.with_verdict("need |exponent - 1.5| <= 0.1 and sup/eps spread <= 2", ok))
}
