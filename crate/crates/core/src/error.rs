use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },

    #[error("mask has {pixels} foreground pixels")]
    EmptyMask { pixels: usize },

    #[error("only {found} of {target} hull-positive points found in {proposals} proposals")]
    HullTooSmall { found: usize, target: usize, proposals: usize },

    #[error("consistency pairs need at least two views")]
    NeedTwoViews,

    #[error("pose provider failed on variant {variant}: {message}")]
    PredictorFailure { variant: usize, message: String },

    #[error("training diverged at step {step}: non-finite {loss}")]
    Diverged { step: usize, loss: &'static str },

    #[error("occupancy field has no iso-crossing cell")]
    EmptyField,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad format: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    /// Stable machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::BehindCamera { .. } => "behind_camera",
            Error::EmptyMask { .. } => "empty_mask",
            Error::HullTooSmall { .. } => "hull_too_small",
            Error::NeedTwoViews => "need_two_views",
            Error::PredictorFailure { .. } => "predictor_failure",
            Error::Diverged { .. } => "diverged",
            Error::EmptyField => "empty_field",
            Error::Precondition(_) => "precondition",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
