//! Validation experiments: configuration, the error, residual and
//! generation sweeps, and their tabular outputs.

mod config;
mod generation;
mod report;
mod scaling;
mod setup;
mod tables;

pub use config::{
    default_eps, params_from_json, parse_json, CarrierSpec, EnvelopeShape, ExperimentConfig,
    ExperimentKind, FamilySpec, Numerics, Outputs, Profile, WaveSelection,
};
pub use generation::{
    doubled_mode_mass, generation_run, run_generation, run_generation_control, GenerationReport,
    GenerationRun,
};
pub use report::{ScalingReport, ScalingRow};
pub use scaling::{
    ansatz_measures, convergence_error, residual_pair, run_ansatz_scaling, run_convergence,
    run_residual_scaling,
};
pub use setup::{build_setup, cells_for, family_chain, fine_dt, Setup};
pub use tables::{
    amplitude_table, dispersion_table, family_scan, push_snapshot, resonance_summary,
    resonance_table, FamilyScan, ResonanceSummary, DEFAULT_C_POINTS, DEFAULT_GAMMAS,
    SNAPSHOT_HEADER, TABLE_ROWS,
};

use crate::error::Result;

/// What an experiment produced: summary line, verdict, main CSV table and a
/// JSON report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub passed: bool,
    pub csv: String,
    pub report: serde_json::Value,
}

impl From<ScalingReport> for Outcome {
    fn from(r: ScalingReport) -> Self {
        Self {
            summary: r.summary_line(),
            passed: r.passed,
            csv: r.to_csv(),
            report: serde_json::to_value(&r).expect("report serializes"),
        }
    }
}

/// Runs the experiment named by `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out: Outcome = match cfg.kind {
        ExperimentKind::Convergence => run_convergence(cfg)?.into(),
        ExperimentKind::ResidualScaling => run_residual_scaling(cfg)?.into(),
        ExperimentKind::AnsatzScaling => run_ansatz_scaling(cfg)?.into(),
        ExperimentKind::GenerationControl => run_generation_control(cfg)?.into(),
        ExperimentKind::Generation => {
            let r = run_generation(cfg)?;
            Outcome {
                summary: r.summary_line(),
                passed: r.passed,
                csv: r.to_csv(),
                report: serde_json::to_value(&r).expect("report serializes"),
            }
        }
        ExperimentKind::DispersionTable => Outcome {
            summary: format!("PASS dispersion_table: {TABLE_ROWS} rows"),
            passed: true,
            csv: dispersion_table(&cfg.params),
            report: serde_json::Value::Null,
        },
        ExperimentKind::ResonanceScan => {
            let s = resonance_summary(&cfg.params);
            let scan = family_scan(&DEFAULT_GAMMAS, DEFAULT_C_POINTS)?;
            let mut violations = scan.violations;
            violations.extend(own_margin_violations(&s));
            let passed = violations.is_empty();
            Outcome {
                summary: format!(
                    "{} resonance_scan: roots {:?}, optical closure margin {:.4e}, third-order margin {:.4e}, {} violations",
                    if passed { "PASS" } else { "FAIL" },
                    s.roots,
                    s.optical_closure_margin,
                    s.third_order_margin,
                    violations.len()
                ),
                passed,
                csv: scan.csv,
                report: serde_json::json!({ "summary": s, "violations": violations }),
            }
        }
    };
    out.report = serde_json::json!({ "config": cfg, "result": out.report });
    Ok(out)
}

/// Impossibility margins of a single chain that fail to be positive.
pub fn own_margin_violations(s: &ResonanceSummary) -> Vec<String> {
    [
        ("optical closure", s.optical_closure_margin),
        ("third-order", s.third_order_margin),
    ]
    .into_iter()
    .filter(|(_, m)| !(*m > 0.0))
    .map(|(name, m)| format!("{name} margin {m:e}"))
    .collect()
}

/// Writes the CSV and JSON outputs named in `cfg.outputs`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &Outcome) -> Result<()> {
    if let Some(path) = &cfg.outputs.csv {
        std::fs::write(path, &out.csv)?;
    }
    if let Some(path) = &cfg.outputs.report {
        std::fs::write(
            path,
            serde_json::to_string_pretty(&out.report).expect("json"),
        )?;
    }
    Ok(())
}
