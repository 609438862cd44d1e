use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} points, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid ground space: {0}")]
    InvalidSpace(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid growth function: {0}")]
    InvalidGrowth(String),

    #[error("parameter out of range: {0}")]
    ParameterDomain(String),

    #[error("set is not a member of the semiring")]
    NotAMember,

    #[error("member enumeration truncated after {yielded} members (budget {budget})")]
    EnumerationTruncated { yielded: usize, budget: usize },

    #[error("exact search infeasible: estimated size {estimated_size:.3e} exceeds cap {cap:.3e}")]
    ExactInfeasible { estimated_size: f64, cap: f64 },

    #[error("filtration is not nested at level {level}")]
    NonNestedFiltration { level: usize },

    #[error("iteration cap of {cap} exceeded; this indicates a bug, termination is guaranteed")]
    IterationCapExceeded { cap: usize },

    #[error("non-increasing semiring sequence detected at index {index}")]
    NonIncreasingSemirings { index: usize },

    #[error("{0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
