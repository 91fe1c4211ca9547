use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("toroidal grids need at least 3 cells per axis, got {width}x{height}")]
    TorusTooSmall { width: usize, height: usize },
    #[error("position ({row}, {col}) is outside the {width}x{height} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("grid parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("max_steps must be at least 1")]
    ZeroMaxSteps,
    #[error("snapshot interval must be at least 1")]
    ZeroSnapshotInterval,
    #[error("ensemble needs at least one run")]
    ZeroRuns,
    #[error("invalid rule parameter: {0}")]
    RuleParams(String),
    #[error("could not build worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("series is empty")]
    EmptySeries,
    #[error("field size must be positive")]
    ZeroFieldSize,
    #[error("step {step}: counts sum to {actual}, expected field size {expected}")]
    Conservation {
        step: usize,
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {required} points to fit, got {actual}")]
    TooFewPoints { required: usize, actual: usize },
    #[error("series carries no sigmoid information: {0}")]
    Degenerate(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("grey and white series differ in length ({grey} vs {white})")]
    LengthMismatch { grey: usize, white: usize },
    #[error("invalid logistic parameters: {0}")]
    InvalidParams(String),
}
