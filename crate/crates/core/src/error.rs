use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityDomain(f64),

    #[error("series too short: need n >= 3, got {0}")]
    SeriesTooShort(usize),

    #[error("degenerate series: zero denominator in the {0} estimator")]
    DegenerateSeries(&'static str),

    #[error("no closed-form conditional bias for {0}")]
    UnsupportedBias(&'static str),

    #[error("predictive density at the limit is numerically zero")]
    VanishingDensity,

    #[error("correction target mismatch: expected {expected}, got {got}")]
    TargetMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("equal-density solver failed to converge: {0}")]
    SolverFailure(String),

    #[error("too many degenerate replicates: {degenerate} of {total} exceeded the 0.1% cap")]
    TooManyDegenerate { degenerate: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("refusing to overwrite existing output {0} (pass --overwrite)")]
    WouldOverwrite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
