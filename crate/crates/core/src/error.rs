use thiserror::Error;

/// Errors produced by the particle method and its verification tools.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density specification: {0}")]
    InvalidDensity(String),

    #[error("particle ensemble is invalid: {0}")]
    InvalidEnsemble(String),

    #[error("discretization produced no particles with positive weight")]
    EmptyEnsemble,

    #[error("non-finite velocity at step {step} (particle {particle})")]
    NonFiniteVelocity { step: usize, particle: usize },

    #[error("{what} must be an integer multiple of the step (got {ratio})")]
    NonIntegralSteps { what: &'static str, ratio: f64 },

    #[error("grid needs at least 4 cells, got {0}")]
    GridTooSmall(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("convergence study needs at least {needed} levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("expected a finite positive value, got {value}"),
        })
    }
}
