use thiserror::Error;

/// Errors raised by the tracking library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty cluster")]
    EmptyCluster,

    #[error("plot index {index} out of range for frame with {len} plots")]
    PlotIndex { index: usize, len: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("non-finite state in Kalman filter")]
    NonFiniteState,

    #[error("singular innovation covariance")]
    SingularInnovation,

    #[error("non-monotone timestamp at frame {frame}: {current} <= {previous}")]
    NonMonotoneTimestamp {
        frame: u64,
        previous: f64,
        current: f64,
    },

    #[error("invalid time step {0}")]
    InvalidTimeStep(f64),

    #[error("previous centroid lies at the radar origin")]
    CentroidAtOrigin,

    #[error("missing ego record for frame {0}")]
    MissingEgo(u64),

    #[error("no pose for frame {0}")]
    MissingPose(u64),

    #[error("no common frames between ground truth and detection")]
    NoCommonFrames,

    #[error("nonzero heading {heading} in ego record for frame {frame}; only straight-line motion is supported")]
    UnsupportedHeading { frame: u64, heading: f64 },

    #[error("optimal matching supports at most {max} clusters, got {got}")]
    MatchingTooLarge { max: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        field: field.to_string(),
        reason: reason.into(),
    }
}
