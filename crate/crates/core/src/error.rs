use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty query domain")]
    EmptyQueryDomain,
    #[error("datasets not adjacent: {0}")]
    NotAdjacent(String),
    #[error("attack distribution undefined: k1 = {k1} must exceed scale b = {scale}")]
    AttackUndefined { k1: f64, scale: f64 },
    #[error("degenerate stealth budget: gamma = {0} (handle the gamma -> 0 limit explicitly)")]
    DegenerateStealthBudget(f64),
    #[error("boundary case; use limit analysis ({0})")]
    BoundaryCase(String),
    #[error("zero-sensitivity query needs no noise")]
    ZeroSensitivity,
    #[error("non-degenerate input; use calibrate_epsilon")]
    NotDegenerate,
    #[error("root not bracketed on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("calibration round-trip failed: predicted deviation {predicted}, requested {requested}")]
    RoundTrip { predicted: f64, requested: f64 },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("missing series for PMU(s): {}", .0.join(", "))]
    MissingSeries(Vec<String>),
    #[error("series too short: need at least {required} values, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },
    #[error("series misaligned: {0}")]
    Misaligned(String),
    #[error("window out of range: {0}")]
    WindowOutOfRange(String),
    #[error("malformed CSV header {found:?}; expected `timestamp,value` or `timestamp,value,quality`")]
    MalformedHeader { found: String },
    #[error("empty file: {0}")]
    EmptyFile(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
