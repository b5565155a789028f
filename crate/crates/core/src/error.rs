use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("prior {0} is outside the open interval (0, 1)")]
    InvalidPrior(f64),

    #[error("noise variance must be positive, got {0}")]
    InvalidNoise(f64),

    #[error("utility map is not strictly increasing between v = {lo} and v = {hi}")]
    NotIncreasing { lo: f64, hi: f64 },

    #[error("inconsistent matching: {0}")]
    InconsistentMatching(String),

    #[error("brute-force enumeration supports at most {limit} SUs and {limit} PUs, got M = {m}, N = {n}")]
    TooLarge { m: usize, n: usize, limit: usize },

    #[error("improvement baseline must be positive, got {0}")]
    NonPositiveBaseline(f64),

    #[error("trial {trial} produced an unstable matching with blocking pairs {pairs:?}")]
    Unstable { trial: u64, pairs: Vec<(usize, usize)> },

    #[error("cell M = {m}, N = {n}: {source}")]
    Cell { m: usize, n: usize, source: Box<Error> },

    #[error("malformed results file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
