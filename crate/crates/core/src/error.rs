use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigenfunction index {n} exceeds the supported maximum {max}")]
    IndexTooLarge { n: usize, max: usize },

    #[error(
        "spectral weight {captured:.3e} captured below n_max = {n_max}; grid or basis too small"
    )]
    TailTooLarge { captured: f64, n_max: usize },

    #[error(
        "grid [{x_min}, {x_max}] does not cover the required interval [{need_min}, {need_max}]"
    )]
    DomainTooSmall {
        x_min: f64,
        x_max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("edge amplitude {amplitude:.3e} exceeded the leak threshold at step {step}")]
    BoundaryLeak { step: usize, amplitude: f64 },

    #[error("first-order denominator vanishes for level {n}: |{denominator:.3e}| is resonant")]
    ResonantDenominator { n: usize, denominator: f64 },

    #[error("second-order resonance: detuning {detuning:.3e} is below threshold")]
    SecondOrderResonance { detuning: f64 },

    #[error("intermediate level {k} has a vanishing denominator {denominator:.3e}")]
    IntermediatePole { k: usize, denominator: f64 },

    #[error("levels are degenerate (E = {energy}); no resonance frequency")]
    DegeneratePair { energy: f64 },

    #[error("ODE integration failed: {0}")]
    StepFailure(String),

    #[error("root finder failed: {0}")]
    NoRoot(String),

    #[error(
        "photon energy {photon_energy:.6e} erg is below the work function {work_function:.6e} erg"
    )]
    BelowThreshold {
        photon_energy: f64,
        work_function: f64,
    },

    #[error(
        "timescale ordering violated: tau_r = {tau_r:e}, tau_ed = {tau_ed:e}, tau_q = {tau_q:e}"
    )]
    OrderingViolation { tau_r: f64, tau_ed: f64, tau_q: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::IndexTooLarge { .. } => "IndexTooLarge",
            Error::TailTooLarge { .. } => "TailTooLarge",
            Error::DomainTooSmall { .. } => "DomainTooSmall",
            Error::BoundaryLeak { .. } => "BoundaryLeak",
            Error::ResonantDenominator { .. } => "ResonantDenominator",
            Error::SecondOrderResonance { .. } => "SecondOrderResonance",
            Error::IntermediatePole { .. } => "IntermediatePole",
            Error::DegeneratePair { .. } => "DegeneratePair",
            Error::StepFailure(_) => "StepFailure",
            Error::NoRoot(_) => "NoRoot",
            Error::BelowThreshold { .. } => "BelowThreshold",
            Error::OrderingViolation { .. } => "OrderingViolation",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
