use thiserror::Error;

/// Errors raised anywhere in the lattice, envelope and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates one of the stability inequalities.
    #[error("stability assumption violated: {0}")]
    Stability(String),

    /// A solution produced by a closed-form route failed its direct check.
    #[error("domain error: {0}")]
    Domain(String),

    /// A wave pair does not satisfy the conditions of the claimed mode.
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("waves are not a resonant pair: {0}")]
    NotResonant(String),

    /// A combination carrier sits too close to the dispersion relation.
    #[error("near resonance at {index}: |det H| = {det:.3e} below tolerance {tol:.3e}")]
    NearResonance { index: String, det: f64, tol: f64 },

    #[error("unknown carrier index {0}")]
    UnknownIndex(String),

    /// A wavenumber is not of the form 2*pi*k/N on an N-cell lattice.
    #[error("wavenumber {theta} is not commensurate with {cells} cells")]
    Incommensurate { theta: f64, cells: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    /// The state stopped being finite during time stepping.
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("amplitude trajectory unavailable at tau = {tau}")]
    TrajectoryUnavailable { tau: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
