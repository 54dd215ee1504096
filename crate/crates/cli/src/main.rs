//! `dichain` command-line front end.
//!
//! Exit status: 0 on success or PASS, 2 when an experiment ran but failed its
//! threshold, 1 on usage, configuration or runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dichain::harness::{
    self, amplitude_table, build_setup, dispersion_table, family_scan, own_margin_violations,
    params_from_json, push_snapshot, resonance_summary, resonance_table, ExperimentConfig,
    ExperimentKind, DEFAULT_C_POINTS, DEFAULT_GAMMAS, SNAPSHOT_HEADER,
};
use dichain::microsim::{integrate, SimConfig};
use dichain::model::LatticeState;

#[derive(Parser)]
#[command(
    name = "dichain",
    version,
    about = "Diatomic lattice envelope experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate both dispersion branches and group velocities.
    Dispersion {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Locate acoustic-optical resonances and report the closure margins.
    Resonance {
        #[arg(long)]
        params: PathBuf,
        /// Family scan `gamma,c,b_over_a,theta_star,residual`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optical-to-acoustic stiffness ratios of the family scan.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GAMMAS)]
        gammas: Vec<f64>,
        /// Number of `c` values in `[0, 1]` per ratio.
        #[arg(long, default_value_t = DEFAULT_C_POINTS)]
        c_points: usize,
        /// Optional `theta,mismatch` table for the given chain.
        #[arg(long)]
        mismatch_out: Option<PathBuf>,
    },
    /// Integrate the envelope equations of a config and tabulate them.
    Amplitudes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Small parameter; defaults to the first configured value.
        #[arg(long)]
        eps: Option<f64>,
        /// Write every k-th stored snapshot.
        #[arg(long, default_value_t = 100)]
        every: usize,
    },
    /// Run the lattice from the improved approximation or a state file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// CSV with header `j,u1,u2,v1,v2` replacing the approximation.
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        /// Final time; defaults to `tau0 / eps`.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 500)]
        stride: usize,
    },
    /// Run the experiment named in a config.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the wave generation experiment of a config.
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&read(path)?)
        .with_context(|| format!("in config {}", path.display()))
}

fn read_state(path: &Path) -> Result<LatticeState> {
    let text = read(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("empty state file")?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["j", "u1", "u2", "v1", "v2"] {
        bail!("state file header must be `j,u1,u2,v1,v2`, got `{header}`");
    }
    let (mut pos, mut vel) = (Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("row {} of {}", row + 1, path.display()))?;
        if vals.len() != 5 || vals[0] != row as f64 {
            bail!(
                "row {} of {} must be `{row},u1,u2,v1,v2`",
                row + 1,
                path.display()
            );
        }
        pos.push([vals[1], vals[2]]);
        vel.push([vals[3], vals[4]]);
    }
    Ok(LatticeState::new(pos, vel, 0.0)?)
}

fn run_experiment(cfg: &ExperimentConfig) -> Result<bool> {
    let out = harness::run(cfg)?;
    harness::write_outputs(cfg, &out)?;
    println!("{}", out.summary);
    Ok(out.passed)
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Dispersion { params, out } => {
            let p = params_from_json(&read(&params)?)?;
            write(&out, &dispersion_table(&p))?;
        }
        Command::Resonance {
            params,
            out,
            gammas,
            c_points,
            mismatch_out,
        } => {
            let p = params_from_json(&read(&params)?)?;
            let s = resonance_summary(&p);
            println!("acoustic-optical resonances: {:?}", s.roots);
            println!("optical closure margin: {}", s.optical_closure_margin);
            println!("third-order margin: {}", s.third_order_margin);
            let scan = family_scan(&gammas, c_points)?;
            if let Some(out) = out {
                write(&out, &scan.csv)?;
            }
            if let Some(out) = mismatch_out {
                write(&out, &resonance_table(&p))?;
            }
            let mut violations = scan.violations;
            violations.extend(own_margin_violations(&s));
            for v in &violations {
                eprintln!("violation: {v}");
            }
            if !violations.is_empty() {
                return Ok(false);
            }
        }
        Command::Amplitudes {
            config,
            out,
            eps,
            every,
        } => {
            let cfg = load_config(&config)?;
            let eps = eps.unwrap_or(cfg.eps[0]);
            let setup = build_setup(&cfg, eps)?;
            let traj = dichain::amplitude::evolve(
                &setup.system,
                &setup.fields,
                cfg.tau0,
                cfg.numerics.dtau,
            )?;
            write(&out, &amplitude_table(&traj, every))?;
        }
        Command::Simulate {
            config,
            out,
            initial,
            eps,
            t_end,
            stride,
        } => {
            let cfg = load_config(&config)?;
            let eps = eps.unwrap_or(cfg.eps[0]);
            let setup = build_setup(&cfg, eps)?;
            let s0 = match initial {
                Some(path) => read_state(&path)?,
                None => setup
                    .ansatz(cfg.tau0, cfg.numerics.dtau)?
                    .spec_at(0.0)?
                    .improved_state(),
            };
            let t_end = t_end.unwrap_or(cfg.tau0 / eps);
            let dt = cfg
                .numerics
                .dt
                .unwrap_or_else(|| SimConfig::default_dt(&setup.params));
            let mut table = String::from(SNAPSHOT_HEADER);
            integrate(
                &setup.params,
                &s0,
                &SimConfig::new(dt, t_end, stride),
                |s| push_snapshot(&mut table, s),
            )?;
            write(&out, &table)?;
        }
        Command::Validate { config } => return run_experiment(&load_config(&config)?),
        Command::Generate { config } => {
            let mut cfg = load_config(&config)?;
            cfg.kind = ExperimentKind::Generation;
            return run_experiment(&cfg);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let shown = e.print().is_ok();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
                    if shown =>
                {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
