use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChainParams;
use crate::spectrum::Branch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    Generation,
    GenerationControl,
    ResidualScaling,
    AnsatzScaling,
    DispersionTable,
    ResonanceScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::Generation => "generation",
            Self::GenerationControl => "generation_control",
            Self::ResidualScaling => "residual_scaling",
            Self::AnsatzScaling => "ansatz_scaling",
            Self::DispersionTable => "dispersion_table",
            Self::ResonanceScan => "resonance_scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Sech,
    Constant,
}

/// Initial envelope `amplitude * sech(width * (y - L/2))`, or the constant
/// `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeShape {
    #[serde(default)]
    pub profile: Profile,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
}

impl Default for EnvelopeShape {
    fn default() -> Self {
        Self {
            profile: Profile::Sech,
            amplitude: 1.0,
            width: 1.0,
        }
    }
}

/// One carrier of a non-resonant setup. `theta` is snapped to the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub branch: Branch,
    pub theta: f64,
    /// Complex prefactor `[re, im]` of the envelope.
    #[serde(default = "unit_complex")]
    pub amplitude: [f64; 2],
}

/// Resonant pair from the family `v11 = a, v21 = gamma a, w11 = w21 = b`
/// with the acoustic wavenumber fixed by `c = (1 + cos theta)/2` and `b`
/// solved for exact resonance. Quadratic and cubic coefficients are taken
/// from the configured chain parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub gamma: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub a: f64,
    /// Envelope prefactors of the acoustic and optical carriers.
    #[serde(default = "unit_pair")]
    pub amplitudes: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveSelection {
    Carriers(Vec<CarrierSpec>),
    ResonantFamily(FamilySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Nominal macroscopic length; the lattice has `round(L / eps)` cells.
    #[serde(default = "default_length")]
    pub domain_length: f64,
    /// Envelope grid size (power of two).
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Lattice time step; chosen per experiment when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_dtau")]
    pub dtau: f64,
    #[serde(default = "default_h0")]
    pub h0: f64,
    /// Values below ten times this floor are left out of exponent fits.
    #[serde(default = "default_floor")]
    pub noise_floor: f64,
    /// Number of sample intervals on `[0, tau0]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            domain_length: default_length(),
            grid_points: default_grid(),
            dt: None,
            dtau: default_dtau(),
            h0: default_h0(),
            noise_floor: default_floor(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Main table of the experiment.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    /// Report as JSON.
    #[serde(default)]
    pub report: Option<PathBuf>,
}

/// Everything one experiment needs, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: ChainParams,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "one")]
    pub tau0: f64,
    #[serde(default)]
    pub envelope: EnvelopeShape,
    #[serde(default)]
    pub waves: Option<WaveSelection>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> f64 {
    1.0
}
fn unit_complex() -> [f64; 2] {
    [1.0, 0.0]
}
fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_length() -> f64 {
    40.0
}
fn default_grid() -> usize {
    256
}
fn default_dtau() -> f64 {
    1e-3
}
fn default_h0() -> f64 {
    crate::ansatz::DEFAULT_H0
}
fn default_floor() -> f64 {
    1e-6
}
fn default_samples() -> usize {
    50
}
fn default_beta() -> f64 {
    1.5
}

/// The standard sweep `0.1 * 2^{-k/2}`, `k = 0..4`.
pub fn default_eps() -> Vec<f64> {
    vec![0.1, 0.0707, 0.05, 0.0354, 0.025]
}

/// Deserializes JSON text; errors name the path of the offending key.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("at `{path}`: {}", e.into_inner()))
    })
}

/// Chain parameters from a JSON object with keys `v1, v2, w1, w2`.
pub fn params_from_json(text: &str) -> Result<ChainParams> {
    let p: ChainParams = parse_json(text)?;
    p.validate()?;
    Ok(p)
}

impl ExperimentConfig {
    /// Parses and validates JSON; errors name the path of the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.eps.is_empty() {
            return Err(Error::Config("`eps` must not be empty".into()));
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e <= 0.2)) {
            return Err(Error::Config("`eps` values must lie in (0, 0.2]".into()));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("`eps` must be strictly decreasing".into()));
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::Config(format!(
                "`tau0` must be positive, got {}",
                self.tau0
            )));
        }
        if !(self.beta > 1.0 && self.beta <= 1.5) {
            return Err(Error::Config(format!(
                "`beta` must lie in (1, 1.5], got {}",
                self.beta
            )));
        }
        let n = &self.numerics;
        if n.grid_points < 16 || !n.grid_points.is_power_of_two() {
            return Err(Error::Config(
                "`numerics.grid_points` must be a power of two >= 16".into(),
            ));
        }
        if !(n.domain_length > 0.0 && n.dtau > 0.0 && n.h0 > 0.0 && n.noise_floor >= 0.0) {
            return Err(Error::Config(
                "`numerics` lengths and steps must be positive".into(),
            ));
        }
        if n.samples == 0 {
            return Err(Error::Config("`numerics.samples` must be >= 1".into()));
        }
        if matches!(n.dt, Some(dt) if !(dt > 0.0)) {
            return Err(Error::Config("`numerics.dt` must be positive".into()));
        }
        if !(self.envelope.width > 0.0) {
            return Err(Error::Config("`envelope.width` must be positive".into()));
        }
        match &self.waves {
            Some(WaveSelection::Carriers(c)) if c.is_empty() || c.len() > 2 => Err(Error::Config(
                "`waves.carriers` needs one or two entries".into(),
            )),
            Some(WaveSelection::ResonantFamily(f))
                if !(f.gamma > 1.0 && (0.0..=1.0).contains(&f.c) && f.a > 0.0) =>
            {
                Err(Error::Config(
                    "`waves.resonant_family` needs gamma > 1, c in [0, 1], a > 0".into(),
                ))
            }
            None if !matches!(
                self.kind,
                ExperimentKind::DispersionTable | ExperimentKind::ResonanceScan
            ) =>
            {
                Err(Error::Config(format!(
                    "experiment `{}` needs `waves`",
                    self.kind.name()
                )))
            }
            _ => Ok(()),
        }
    }
}
