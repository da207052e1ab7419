use thiserror::Error;

/// Errors surfaced by distribution construction, auction evaluation, oracles
/// and learners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample set")]
    EmptySampleSet,

    #[error("quantile zero has no witness value")]
    QuantileZero,

    #[error("quantile {0} outside (0, 1]")]
    QuantileOutOfRange(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("discretize first: exact auction construction needs discrete buyers")]
    DiscretizeFirst,

    #[error("bid count {got} does not match buyer count {want}")]
    BidCountMismatch { got: usize, want: usize },

    #[error("exact enumeration over {0} profiles exceeds the cap; use MonteCarlo")]
    EnumerationTooLarge(u128),

    #[error("interval narrower than targeting power")]
    IntervalTooNarrow,

    #[error("queries unavailable at this targeting power")]
    QueriesUnavailable,

    #[error("wrong regime: {0}")]
    WrongRegime(&'static str),

    #[error("unknown family")]
    UnknownFamily,

    #[error("negative value")]
    NegativeValue,

    #[error("learner requires exactly one buyer")]
    NotSingleBuyer,

    #[error("generator failed family check after {0} attempts")]
    GeneratorFailed(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
