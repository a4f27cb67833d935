//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested second moment cannot be met by a kernel supported in
    /// [-1, 1]; carries the admissible interval for `gamma`.
    #[error(
        "unachievable second moment: 2*gamma = {requested:.12e} exceeds the bump maximum \
         {max_moment:.12e}; admissible gamma range is (0, {max_gamma:.12e}]"
    )]
    UnachievableMoment {
        requested: f64,
        max_moment: f64,
        max_gamma: f64,
    },

    /// The scaled kernel support must fit inside half a period so the circle
    /// convolution coincides with the line convolution.
    #[error(
        "kernel support too wide: eps * b = {eps_b:.6e} must be < 0.5 so the scaled support \
         fits inside one period"
    )]
    SupportTooWide { eps_b: f64 },

    #[error(
        "quadrature did not converge to {tolerance:.1e} after {refinements} refinements \
         (last change {last_change:.3e})"
    )]
    QuadratureDiverged {
        tolerance: f64,
        refinements: usize,
        last_change: f64,
    },

    /// Time integration produced a non-finite or runaway state.
    #[error("blow-up at t = {time:.6e} (step {step}): {detail}")]
    BlowUp {
        time: f64,
        step: usize,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: config problems are distinguished from
    /// failed runs.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::UnachievableMoment { .. } => 2,
            _ => 1,
        }
    }
}
