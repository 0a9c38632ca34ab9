use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::ModelError;
use crate::line::Line;

/// One bundle per agent, together a partition of the goods.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    /// Validates that `bundles` partition `0..m`.
    pub fn new(bundles: Vec<Bundle>, m: usize) -> Result<Self, ModelError> {
        let mut seen = Bundle::empty();
        let mut count = 0usize;
        for (i, b) in bundles.iter().enumerate() {
            b.check_range(m)?;
            if !b.is_disjoint(&seen) {
                let g = b.intersection(&seen).first().expect("nonempty");
                return Err(ModelError::NotAPartition { m, reason: format!("good {g} is in bundle {i} and an earlier one") });
            }
            seen = seen.union(b);
            count += b.len();
        }
        if count != m {
            return Err(ModelError::NotAPartition { m, reason: format!("bundles cover {count} goods") });
        }
        Ok(Allocation { bundles })
    }

    /// Like [`Allocation::new`] and also checks the number of bundles.
    pub fn with_agents(bundles: Vec<Bundle>, n: usize, m: usize) -> Result<Self, ModelError> {
        if bundles.len() != n {
            return Err(ModelError::WrongBundleCount { expected: n, got: bundles.len() });
        }
        Allocation::new(bundles, m)
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn into_bundles(self) -> Vec<Bundle> {
        self.bundles
    }

    /// Whether every bundle is a contiguous block of `line`.
    pub fn is_contiguous_on(&self, line: &Line) -> bool {
        self.bundles.iter().all(|b| line.block_span(b).is_some())
    }

    /// The bundles as a set, ignoring which agent holds which.
    pub fn bundle_set(&self) -> Vec<Bundle> {
        let mut v = self.bundles.clone();
        v.sort();
        v
    }
}
