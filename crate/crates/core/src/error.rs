use thiserror::Error;

/// All failure modes across the crate.
#[derive(Debug, Error)]
pub enum Error {
    // ---- input / series ----
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: missing value")]
    MissingValue { line: u64 },
    #[error("line {line}: dates not strictly increasing ({prev} then {next})")]
    NonMonotonicDates { line: u64, prev: String, next: String },
    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: u64, date: String },
    #[error("line {line}: monthly series must advance one month per row ({prev} then {next})")]
    NonConsecutiveMonths { line: u64, prev: String, next: String },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("non-finite value at observation {index}")]
    NonFiniteValue { index: usize },
    #[error("empty range: no observations between {from} and {to}")]
    EmptyRange { from: String, to: String },
    #[error("invalid range: {from} is after {to}")]
    InvalidRange { from: String, to: String },

    // ---- regression / detectors ----
    #[error("series too short: {len} observations, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("window too small: {len} observations, need at least {required} for lag {lag}")]
    WindowTooSmall { len: usize, required: usize, lag: usize },
    #[error("degenerate regression on window [{start}, {end}]: {reason}")]
    DegenerateRegression {
        start: usize,
        end: usize,
        reason: &'static str,
    },
    #[error("every admissible window was degenerate")]
    AllWindowsDegenerate,
    #[error("minimum window {given} is invalid: need {required}..={max}")]
    InvalidMinWindow {
        given: usize,
        required: usize,
        max: usize,
    },

    // ---- simulation / quantiles ----
    #[error("no draws to estimate from")]
    EmptyDraws,
    #[error("invalid quantile level(s): {0}")]
    InvalidLevel(String),
    #[error("null simulation failed: {redraws} replications re-drawn without success")]
    SimulationFailed { redraws: usize },
    #[error("critical value table lacks the 0.90/0.95/0.99 levels")]
    MissingStandardLevels,
    #[error("cached draws do not match the request: {0}")]
    CacheKeyMismatch(String),

    // ---- stamping / dgp / config ----
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
