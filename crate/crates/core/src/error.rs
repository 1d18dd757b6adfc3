//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("total degree {0} is odd; a perfect matching of half-edges needs an even total")]
    OddTotalDegree(usize),

    #[error("degree sequence is empty")]
    EmptySequence,

    #[error("degree distribution has zero mean")]
    ZeroMeanDegree,

    #[error("vertex {vertex} out of range for {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },

    #[error("statistic value {value} exceeds the declared sup-norm {sup_norm}")]
    StatisticOutOfBound { value: f64, sup_norm: f64 },

    #[error("standardisation requires a strictly positive variance")]
    ZeroVariance,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("empty sample")]
    EmptySample,

    #[error("sample variance is zero; cannot standardise")]
    DegenerateVariance,

    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid experiment config: {0}")]
    InvalidExperiment(String),

    #[error("unknown statistic {0:?}")]
    UnknownStatistic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
