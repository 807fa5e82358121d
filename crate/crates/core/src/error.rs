use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectral window too narrow: {0}")]
    WindowTooNarrow(String),

    #[error("profile has zero absorbing area")]
    ZeroArea,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time step {dt:e} s exceeds stability bound {bound:e} s")]
    StepTooCoarse { dt: f64, bound: f64 },

    #[error("input spectrum clipped by the profile window: {0}")]
    SpectrumClipped(String),

    #[error("comb peaks unresolved: grid step {step:e} Hz coarser than {limit:e} Hz")]
    UnresolvedComb { step: f64, limit: f64 },

    #[error("time resolution insufficient: {0}")]
    TimeResolution(String),

    #[error("undefined signal: {0}")]
    Undefined(String),

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("oracle divergence in `{check}`: {detail}")]
    OracleDivergence { check: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
