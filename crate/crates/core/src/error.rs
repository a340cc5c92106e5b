use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported filter: {family} with {vanishing_moments} vanishing moments")]
    UnsupportedFilter { family: String, vanishing_moments: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("sample needs at least {required} observations, got {got}")]
    SampleTooSmall { required: usize, got: usize },

    #[error("degenerate schedule: j1 = {j1} is below j0 = {j0}")]
    DegenerateSchedule { j0: i64, j1: i64 },

    #[error("zero interquartile range")]
    ZeroInterquartileRange,

    #[error("estimate grid [{grid_lo}, {grid_hi}] does not cover the support [{lo}, {hi}]")]
    GridCoverage { grid_lo: f64, grid_hi: f64, lo: f64, hi: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("replicate {replicate} (seed {seed}) failed: {source}")]
    Replicate {
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
