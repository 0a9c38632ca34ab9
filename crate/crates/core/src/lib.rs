//! Core model for fair division of indivisible goods under value queries.
//!
//! Agents are only reachable through counted [`oracle::ValuationOracle`]s.
//! Values are exact nonnegative rationals and bundles are canonical sets of
//! good indices.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod allocation;
pub mod audit;
pub mod bundle;
pub mod error;
pub mod instance;
pub mod line;
pub mod oracle;
pub mod valuation;
pub mod value;

pub use allocation::Allocation;
pub use bundle::Bundle;
pub use error::{AuditError, ModelError, QueryError, ValueError};
pub use instance::{AgentSpec, Instance};
pub use line::{prefix_bundle, suffix_bundle, Line};
pub use oracle::{build_oracle, build_panel, AnswerStrategy, OraclePanel, QueryRecord, QuerySource, ValuationOracle};
pub use valuation::{TableEntry, Valuation, ValuationClass, ValuationSpec, Weights};
pub use value::Value;

pub type AgentId = usize;

/// Index of a good, `0..m`. Displayed one-based as `g1`, `g2`, ...
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoodId(u32);

impl GoodId {
    pub fn new(index: usize) -> Self {
        GoodId(u32::try_from(index).expect("good index fits in u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn from_raw(raw: u32) -> Self {
        GoodId(raw)
    }
}

impl fmt::Display for GoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0 as u64 + 1)
    }
}

impl fmt::Debug for GoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
