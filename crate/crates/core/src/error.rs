use thiserror::Error;

use crate::bundle::Bundle;
use crate::GoodId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("value must be nonnegative, got {0}")]
    Negative(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

/// Malformed goods, bundles, lines, allocations or instances.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("good {good} is out of range for {m} goods")]
    GoodOutOfRange { good: GoodId, m: usize },
    #[error("position {position} is out of range 0..={len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("good {0} appears more than once")]
    DuplicateGood(GoodId),
    #[error("line is not a permutation of {m} goods")]
    NotAPermutation { m: usize },
    #[error("bundles are not a partition of {m} goods: {reason}")]
    NotAPartition { m: usize, reason: String },
    #[error("expected {expected} bundles, got {got}")]
    WrongBundleCount { expected: usize, got: usize },
    #[error("agent {agent} is out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Value(#[from] ValueError),
}

/// Failure to answer a value query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("valuation table has no entry for {0:?}")]
    IncompleteSpecification(Bundle),
    #[error("adversary budget exhausted after {0} queries")]
    Exhausted(usize),
    #[error("waiting for agent {agent} to value {bundle:?}")]
    AwaitingAnswer { agent: usize, bundle: Bundle },
    #[error("replay diverged at query {index}")]
    ReplayDiverged { index: usize },
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Failure of a fairness check or brute-force enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}
