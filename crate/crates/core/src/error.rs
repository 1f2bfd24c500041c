//! Error type shared by every computation module.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid grid: n = {n} (need at least {min})")]
    InvalidGrid { n: usize, min: usize },

    #[error("domain too small: half-length {half_length} < support radius {support}")]
    DomainTooSmall { half_length: f64, support: f64 },

    #[error("range scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("speed c = {c} is below the KPP speed c_K = {c_kpp}")]
    SubcriticalSpeed { c: f64, c_kpp: f64 },

    #[error("D = {road} does not exceed the threshold diffusivity {threshold}")]
    BelowThreshold { road: f64, threshold: f64 },

    #[error("upper speed bound undefined: D = {road} <= d = {field}")]
    BoundUndefined { road: f64, field: f64 },

    #[error(
        "lambda = {lambda} lies outside the open decay interval ({lower}, {upper}) at c = {c}"
    )]
    LambdaOutsideDomain {
        lambda: f64,
        c: f64,
        lower: f64,
        upper: f64,
    },

    #[error("BVP resolution too low: n = {n}, need at least {min}")]
    Resolution { n: usize, min: usize },

    #[error("kernel mass {kernel} does not match model mass {model} for {which}")]
    MassMismatch {
        which: &'static str,
        kernel: f64,
        model: f64,
    },

    #[error("speedfinder bracket failure: G({lower}) = {gap_lower}, G({upper}) = {gap_upper}")]
    BracketFailure {
        lower: f64,
        upper: f64,
        gap_lower: f64,
        gap_upper: f64,
    },

    #[error("simulation unstable at t = {t}: value {value} exceeds {limit}")]
    Instability { t: f64, value: f64, limit: f64 },

    #[error("simulation lost positivity at t = {t}: min value {value}")]
    Positivity { t: f64, value: f64 },

    #[error("front at x = {position} came within the boundary margin of x = {limit} (t = {t})")]
    FrontReachedBoundary { t: f64, position: f64, limit: f64 },

    #[error("invalid simulation config: {0}")]
    SimConfig(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::InvalidGrid { .. }
            | Error::DomainTooSmall { .. }
            | Error::NonPositiveScale(_)
            | Error::MassMismatch { .. }
            | Error::SimConfig(_)
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::Validation(_) => 4,
            _ => 3,
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}
