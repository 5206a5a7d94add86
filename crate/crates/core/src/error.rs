use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GsqgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("near self-intersection: minimum chord {min_chord:.3e} below threshold {threshold:.3e}")]
    NearSelfIntersection { min_chord: f64, threshold: f64 },

    #[error("parameterization is not uniform speed: relative speed deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    InvalidParameterization { deviation: f64, tolerance: f64 },

    #[error("quadrature failed to reach tolerance {requested:.3e}: achieved {achieved:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },

    #[error("time integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed content: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl GsqgError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GsqgError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GsqgError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, GsqgError>;
