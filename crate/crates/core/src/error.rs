use alloc::string::String;

/// Errors produced by the scoring core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("nexus set is empty")]
    EmptyNexusSet,
    #[error("nexus {index} has empty text")]
    EmptyNexusText { index: usize },
    #[error("nexus {index} has invalid weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("degenerate weights: total nexus weight is zero")]
    DegenerateWeights,
    #[error("embedding vector must have dim > 0")]
    ZeroDim,
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("empty side")]
    EmptySide,
    #[error("empty trace")]
    EmptyTrace,
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least two observations, got {0}")]
    TooFewObservations(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("gold answer {0:?} is not one of A-D")]
    InvalidGold(String),
    #[error("{0} group is empty")]
    EmptyGroup(&'static str),
    #[error("result for unknown item {0:?}")]
    UnknownItem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
