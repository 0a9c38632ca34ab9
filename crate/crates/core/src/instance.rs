use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::valuation::{Valuation, ValuationSpec, Weights};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub name: String,
    pub valuation: ValuationSpec,
}

/// Goods, agents and how each agent values bundles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    /// Good labels; empty means the default `g1..gm`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goods: Vec<String>,
    pub agents: Vec<AgentSpec>,
}

#[derive(Deserialize)]
struct RawInstance {
    m: usize,
    n: usize,
    #[serde(default)]
    goods: Vec<String>,
    agents: Vec<AgentSpec>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = ModelError;
    fn try_from(r: RawInstance) -> Result<Self, ModelError> {
        Instance::new(r.m, r.n, r.goods, r.agents)
    }
}

impl Instance {
    pub fn new(m: usize, n: usize, goods: Vec<String>, agents: Vec<AgentSpec>) -> Result<Self, ModelError> {
        if agents.len() != n {
            return Err(ModelError::InvalidInstance(format!("n = {n} but {} agents listed", agents.len())));
        }
        if !goods.is_empty() && goods.len() != m {
            return Err(ModelError::InvalidInstance(format!("m = {m} but {} good labels", goods.len())));
        }
        if m > u32::MAX as usize / 2 {
            return Err(ModelError::InvalidInstance(format!("too many goods: {m}")));
        }
        let inst = Instance { m, n, goods, agents };
        inst.compile()?;
        Ok(inst)
    }

    /// One agent per spec, default names.
    pub fn from_specs(m: usize, specs: Vec<ValuationSpec>) -> Result<Self, ModelError> {
        let agents: Vec<AgentSpec> = specs
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| AgentSpec { name: format!("a{}", i + 1), valuation })
            .collect();
        Instance::new(m, agents.len(), Vec::new(), agents)
    }

    /// Additive agents with integer weights, one row per agent.
    pub fn additive(rows: &[Vec<u64>]) -> Result<Self, ModelError> {
        let m = rows.first().map_or(0, Vec::len);
        let specs = rows.iter().map(|w| ValuationSpec::Additive { weights: Weights::Integers(w.clone()) }).collect();
        Instance::from_specs(m, specs)
    }

    /// `n` agents sharing the same integer weights.
    pub fn identical_additive(weights: &[u64], n: usize) -> Result<Self, ModelError> {
        Instance::additive(&vec![weights.to_vec(); n])
    }

    pub fn label(&self, good: usize) -> String {
        self.goods.get(good).cloned().unwrap_or_else(|| format!("g{}", good + 1))
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.m).map(|i| self.label(i)).collect()
    }

    pub fn compile(&self) -> Result<Vec<Arc<Valuation>>, ModelError> {
        self.agents
            .iter()
            .map(|a| a.valuation.compile(self.m).map(Arc::new))
            .collect()
    }

    pub fn all_additive(&self) -> bool {
        self.agents.iter().all(|a| a.valuation.is_additive())
    }

    pub fn identical(&self) -> bool {
        self.agents.windows(2).all(|w| w[0].valuation == w[1].valuation)
    }
}
