use thiserror::Error;

/// Errors raised by the strip-control toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("nonpositive truncation: half-width X = {0}")]
    NonpositiveTruncation(f64),

    #[error("inadmissible mode index {index:?}: {reason}")]
    InadmissibleIndex { index: Vec<i64>, reason: String },

    #[error("invalid set description: {0}")]
    InvalidSet(String),

    #[error("set description nesting depth {depth} exceeds the limit {limit}")]
    NestingTooDeep { depth: usize, limit: usize },

    #[error("side length {side} on transverse axis {axis} exceeds the cross-section width {width}")]
    TransverseSideTooLarge { axis: usize, side: f64, width: f64 },

    #[error("search range exceeded: {0}")]
    SearchRangeExceeded(String),

    #[error("band exceeds the Nyquist range of the grid: {0}")]
    NyquistExceeded(String),

    #[error("field is zero")]
    ZeroField,

    #[error("set too thin at this resolution")]
    SetTooThin,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("time must be positive, got t = {0}")]
    NonpositiveTime(f64),

    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),

    #[error("constant K must be at least e, got {0}")]
    InvalidUniversalConstant(f64),

    #[error("Gramian ill-conditioned (set effectively non-observable at this truncation): {0}")]
    GramianIllConditioned(String),

    #[error("point lies outside the cube: {0}")]
    PointOutsideCube(String),

    #[error("cube does not fit in the strip: {0}")]
    CubeDoesNotFit(String),

    #[error("stage {stage} failed: {reason}")]
    StageFailure { stage: usize, reason: String },

    #[error("stage norms not decreasing at stage {stage} ({previous} -> {current}); truncation too small")]
    StageNormsNotDecreasing {
        stage: usize,
        previous: f64,
        current: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
