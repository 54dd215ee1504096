use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::amplitude::Trajectory;
use crate::model::{ChainParams, LatticeState};
use crate::resonance::{
    acoustic_acoustic_scan, acoustic_optical_mismatch, family_params,
    find_acoustic_optical_resonance, optical_closure_margin, solve_family_ratio,
    third_order_margin,
};
use crate::spectrum::{group_velocity, omega, Branch};
use crate::Result;

pub const TABLE_ROWS: usize = 1024;

/// `theta,omega_acoustic,omega_optical,vg_acoustic,vg_optical` on `TABLE_ROWS` points of
/// `[-pi, pi)`.
pub fn dispersion_table(p: &ChainParams) -> String {
    let mut out = String::from("theta,omega_acoustic,omega_optical,vg_acoustic,vg_optical\n");
    for i in 0..TABLE_ROWS {
        let th = -PI + 2.0 * PI * i as f64 / TABLE_ROWS as f64;
        let _ = writeln!(
            out,
            "{th},{},{},{},{}",
            omega(p, Branch::Acoustic, th),
            omega(p, Branch::Optical, th),
            group_velocity(p, Branch::Acoustic, th),
            group_velocity(p, Branch::Optical, th)
        );
    }
    out
}

/// Roots of the acoustic-optical mismatch and the two impossibility margins.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResonanceSummary {
    pub roots: Vec<f64>,
    pub optical_closure_margin: f64,
    pub third_order_margin: f64,
}

pub fn resonance_summary(p: &ChainParams) -> ResonanceSummary {
    ResonanceSummary {
        roots: find_acoustic_optical_resonance(p),
        optical_closure_margin: optical_closure_margin(p),
        third_order_margin: third_order_margin(p),
    }
}

/// Ratios used by the family scan when none are configured.
pub const DEFAULT_GAMMAS: [f64; 4] = [1.5, 2.0, 3.0, 5.0];
pub const DEFAULT_C_POINTS: usize = 21;
/// Largest acoustic-to-acoustic condition value still read as non-positive.
const G_TOL: f64 = 1e-12;

/// Resonant-family scan plus every impossibility check that failed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyScan {
    pub csv: String,
    pub violations: Vec<String>,
}

/// `gamma,c,b_over_a,theta_star,residual` over `c_points` values of `c` in
/// `[0, 1]` per ratio. Rows without a positive ratio leave the last two
/// columns empty. The optical closure and third-order margins of every
/// resonant chain, and the acoustic-to-acoustic condition of every ratio, are
/// checked along the way.
pub fn family_scan(gammas: &[f64], c_points: usize) -> Result<FamilyScan> {
    let c_points = c_points.max(2);
    let mut csv = String::from("gamma,c,b_over_a,theta_star,residual\n");
    let mut violations = Vec::new();
    for &gamma in gammas {
        let scan = acoustic_acoustic_scan(gamma);
        if scan.max_g > G_TOL {
            violations.push(format!(
                "gamma={gamma}: acoustic-acoustic condition reaches {:e} at c={}",
                scan.max_g, scan.argmax
            ));
        }
        for i in 0..c_points {
            let c = i as f64 / (c_points - 1) as f64;
            let theta = (2.0 * c - 1.0).clamp(-1.0, 1.0).acos();
            let Some(r) = solve_family_ratio(gamma, c)? else {
                let _ = writeln!(csv, "{gamma},{c},,{theta},");
                continue;
            };
            let p = family_params(1.0, gamma, r);
            let residual = acoustic_optical_mismatch(&p, theta).abs();
            let _ = writeln!(csv, "{gamma},{c},{r},{theta},{residual}");
            for (name, m) in [
                ("optical closure", optical_closure_margin(&p)),
                ("third-order", third_order_margin(&p)),
            ] {
                if !(m > 0.0) {
                    violations.push(format!("gamma={gamma}, c={c}: {name} margin {m:e}"));
                }
            }
        }
    }
    Ok(FamilyScan { csv, violations })
}

/// `theta,mismatch` with mismatch `2 omega_-(theta) - omega_+(2 theta)` on
/// `TABLE_ROWS` points of `[0, pi]`.
pub fn resonance_table(p: &ChainParams) -> String {
    let mut out = String::from("theta,mismatch\n");
    for i in 0..TABLE_ROWS {
        let th = PI * i as f64 / (TABLE_ROWS - 1) as f64;
        let _ = writeln!(out, "{th},{}", acoustic_optical_mismatch(p, th));
    }
    out
}

/// `tau,y,reA1_1,imA1_1[,reA1_2,imA1_2]` for every stored snapshot whose
/// index is a multiple of `every`.
pub fn amplitude_table(traj: &Trajectory, every: usize) -> String {
    let nw = traj.system().wave_count();
    let mut out = String::from("tau,y");
    for k in 1..=nw {
        let _ = write!(out, ",reA1_{k},imA1_{k}");
    }
    out.push('\n');
    let every = every.max(1);
    let last = traj.taus().len() - 1;
    for (i, (tau, snap)) in traj.taus().iter().zip(traj.snapshots()).enumerate() {
        if i % every != 0 && i != last {
            continue;
        }
        for j in 0..snap[0].len() {
            let _ = write!(out, "{tau},{}", snap[0].y(j));
            for f in snap {
                let v = f.values()[j];
                let _ = write!(out, ",{},{}", v.re, v.im);
            }
            out.push('\n');
        }
    }
    out
}

pub const SNAPSHOT_HEADER: &str = "t,j,u1,u2,v1,v2\n";

/// Appends the rows `t,j,u1,u2,v1,v2` of one lattice state.
pub fn push_snapshot(out: &mut String, s: &LatticeState) {
    for (j, (u, v)) in s.pos.iter().zip(&s.vel).enumerate() {
        let _ = writeln!(out, "{},{j},{},{},{},{}", s.t, u[0], u[1], v[0], v[1]);
    }
}
