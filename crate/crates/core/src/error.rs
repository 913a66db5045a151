use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pointwise value undefined for delta kicks")]
    PointwiseKick,

    #[error("delta kicks are not supported by {0}")]
    KickNotAllowed(&'static str),

    #[error("the Z axis cannot carry a pulse or kick")]
    ZAxisCoupling,

    #[error("kicks must be sorted by time (t = {later} listed before t = {earlier})")]
    UnsortedKicks { later: f64, earlier: f64 },

    #[error("unit vector is not normalized (|u| = {0})")]
    NotNormalized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step count {0} exceeds the limit of 10^9")]
    TooManySteps(u64),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
