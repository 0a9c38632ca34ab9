//! Adaptive adversaries from value-query lower bounds.
//!
//! Each adversary answers queries through an ordinary [`fairq_core::OraclePanel`]
//! (see [`shared::panel`]), so protocols run against it unchanged. Afterwards
//! it can write down concrete valuations that agree with every answer it gave.

use fairq_core::{Instance, QueryRecord, ValuationSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod additive;
pub mod efx;
pub mod matrix;
pub mod monotonic;
pub mod pairs;
pub mod session;
pub mod shared;

pub use additive::AdditiveEfAdversary;
pub use efx::EfxAdversary;
pub use matrix::{RationalMatrix, Rref};
pub use monotonic::MonotonicEfAdversary;
pub use pairs::PairsAdversary;
pub use session::{run_session, AdversaryKind, Driver, Transcript};
pub use shared::{panel, AdaptiveRule};

/// Which answer a decision procedure should be refuted with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum World {
    /// Some allocation is envy-free.
    EnvyFree,
    /// No allocation is envy-free.
    NoEnvyFree,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("both worlds are still possible; pick one")]
    WorldRequired,
    #[error("the answers so far rule out the {0:?} world")]
    WorldClosed(World),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Whether `instance` reproduces every logged answer exactly.
pub fn replay_consistency(log: &[QueryRecord], instance: &Instance) -> bool {
    matches!(fairq_core::oracle::replay_log(instance, log), Ok(None))
}

/// Instance with `n` agents sharing `spec`.
pub fn identical_instance(spec: ValuationSpec, m: usize, n: usize) -> Result<Instance, AdversaryError> {
    Instance::from_specs(m, vec![spec; n]).map_err(|e| AdversaryError::Internal(e.to_string()))
}
