//! Counted value-query oracles.
//!
//! Every answer passes through [`ValuationOracle::query`], which range-checks
//! the bundle, bumps the counter and appends to the log. Nothing is
//! deduplicated here; protocols keep their own memo tables.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{ModelError, QueryError};
use crate::instance::Instance;
use crate::valuation::Valuation;
use crate::value::Value;
use crate::AgentId;

/// Produces the answer to a value query. Adversaries implement this too.
pub trait AnswerStrategy: Send {
    fn answer(&mut self, bundle: &Bundle) -> Result<Value, QueryError>;
}

impl AnswerStrategy for Arc<Valuation> {
    fn answer(&mut self, bundle: &Bundle) -> Result<Value, QueryError> {
        self.value(bundle)
    }
}

impl<F: FnMut(&Bundle) -> Result<Value, QueryError> + Send> AnswerStrategy for F {
    fn answer(&mut self, bundle: &Bundle) -> Result<Value, QueryError> {
        self(bundle)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub agent: AgentId,
    pub bundle: Bundle,
    pub value: Value,
}

pub struct ValuationOracle {
    agent: AgentId,
    m: usize,
    strategy: Box<dyn AnswerStrategy>,
    log: Vec<QueryRecord>,
    count: usize,
    keep_log: bool,
}

impl ValuationOracle {
    pub fn new(agent: AgentId, m: usize, strategy: Box<dyn AnswerStrategy>) -> Self {
        ValuationOracle { agent, m, strategy, log: Vec::new(), count: 0, keep_log: true }
    }

    pub fn agent(&self) -> AgentId {
        self.agent
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn query(&mut self, bundle: &Bundle) -> Result<Value, QueryError> {
        bundle.check_range(self.m)?;
        let value = self.strategy.answer(bundle)?;
        self.count += 1;
        if self.keep_log {
            self.log.push(QueryRecord { agent: self.agent, bundle: bundle.clone(), value: value.clone() });
        }
        Ok(value)
    }

    /// Stops recording queries; only the count is kept. For large runs.
    pub fn count_only(mut self) -> Self {
        self.keep_log = false;
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }
}

/// Anything a protocol can send value queries to.
pub trait QuerySource {
    fn agents(&self) -> usize;
    fn goods(&self) -> usize;
    fn query(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError>;
}

/// One oracle per agent plus the global order in which they were asked.
pub struct OraclePanel {
    oracles: Vec<ValuationOracle>,
    order: Vec<AgentId>,
}

impl OraclePanel {
    pub fn new(oracles: Vec<ValuationOracle>) -> Result<Self, ModelError> {
        let m = oracles.first().map_or(0, |o| o.m);
        for (i, o) in oracles.iter().enumerate() {
            if o.agent != i || o.m != m {
                return Err(ModelError::InvalidInstance(format!("oracle {i} does not match the panel")));
            }
        }
        Ok(OraclePanel { oracles, order: Vec::new() })
    }

    /// Panel of strategies, agent `i` answered by `strategies[i]`.
    pub fn from_strategies(m: usize, strategies: Vec<Box<dyn AnswerStrategy>>) -> Self {
        let oracles = strategies.into_iter().enumerate().map(|(i, s)| ValuationOracle::new(i, m, s)).collect();
        OraclePanel { oracles, order: Vec::new() }
    }

    /// Keeps counts but drops the logs, see [`ValuationOracle::count_only`].
    pub fn count_only(mut self) -> Self {
        self.oracles = self.oracles.into_iter().map(ValuationOracle::count_only).collect();
        self
    }

    pub fn total_queries(&self) -> usize {
        self.order.len()
    }

    pub fn per_agent(&self) -> Vec<usize> {
        self.oracles.iter().map(ValuationOracle::count).collect()
    }

    pub fn oracle(&self, agent: AgentId) -> &ValuationOracle {
        &self.oracles[agent]
    }

    /// All queries in the order they were asked; empty in count-only mode.
    pub fn log(&self) -> Vec<QueryRecord> {
        if self.oracles.iter().any(|o| !o.keep_log) {
            return Vec::new();
        }
        let mut cursor = vec![0usize; self.oracles.len()];
        self.order
            .iter()
            .map(|&a| {
                let r = self.oracles[a].log[cursor[a]].clone();
                cursor[a] += 1;
                r
            })
            .collect()
    }
}

impl QuerySource for OraclePanel {
    fn agents(&self) -> usize {
        self.oracles.len()
    }

    fn goods(&self) -> usize {
        self.oracles.first().map_or(0, |o| o.m)
    }

    fn query(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        let n = self.oracles.len();
        let o = self.oracles.get_mut(agent).ok_or(ModelError::AgentOutOfRange { agent, n })?;
        let v = o.query(bundle)?;
        self.order.push(agent);
        Ok(v)
    }
}

pub fn build_oracle(instance: &Instance, agent: AgentId) -> Result<ValuationOracle, ModelError> {
    let spec = instance
        .agents
        .get(agent)
        .ok_or(ModelError::AgentOutOfRange { agent, n: instance.n })?;
    let v = Arc::new(spec.valuation.compile(instance.m)?);
    Ok(ValuationOracle::new(agent, instance.m, Box::new(v)))
}

pub fn build_panel(instance: &Instance) -> Result<OraclePanel, ModelError> {
    let vals = instance.compile()?;
    Ok(OraclePanel::from_strategies(
        instance.m,
        vals.into_iter().map(|v| Box::new(v) as Box<dyn AnswerStrategy>).collect(),
    ))
}

/// Index of the first record the instance answers differently, if any.
pub fn replay_log(instance: &Instance, log: &[QueryRecord]) -> Result<Option<usize>, QueryError> {
    let vals = instance.compile()?;
    for (i, r) in log.iter().enumerate() {
        let v = vals
            .get(r.agent)
            .ok_or(ModelError::AgentOutOfRange { agent: r.agent, n: instance.n })?;
        if v.value(&r.bundle)? != r.value {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// A prior record of the same agent that `(bundle, value)` would contradict
/// under monotonicity: a subset worth more or a superset worth less.
pub fn monotone_conflict<'a>(history: &'a [QueryRecord], agent: AgentId, bundle: &Bundle, value: &Value) -> Option<&'a QueryRecord> {
    history.iter().filter(|r| r.agent == agent).find(|r| {
        (r.bundle.is_subset(bundle) && r.value > *value) || (bundle.is_subset(&r.bundle) && r.value < *value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_logs() {
        let inst = Instance::additive(&[vec![1, 2], vec![0, 1]]).unwrap();
        let mut panel = build_panel(&inst).unwrap();
        let all = Bundle::all(2);
        assert_eq!(panel.query(0, &all).unwrap(), Value::from_u64(3));
        assert_eq!(panel.query(1, &all).unwrap(), Value::from_u64(1));
        assert_eq!(panel.query(0, &all).unwrap(), Value::from_u64(3));
        assert_eq!(panel.total_queries(), 3);
        assert_eq!(panel.per_agent(), vec![2, 1]);
        let log = panel.log();
        assert_eq!(log.iter().map(|r| r.agent).collect::<Vec<_>>(), vec![0, 1, 0]);
        assert_eq!(replay_log(&inst, &log).unwrap(), None);
        let mut bad = log.clone();
        bad[1].value = Value::from_u64(7);
        assert_eq!(replay_log(&inst, &bad).unwrap(), Some(1));
    }

    #[test]
    fn out_of_range_is_not_counted() {
        let inst = Instance::additive(&[vec![1]]).unwrap();
        let mut o = build_oracle(&inst, 0).unwrap();
        assert!(o.query(&Bundle::range(0..2)).is_err());
        assert_eq!(o.count(), 0);
        assert!(build_oracle(&inst, 1).is_err());
    }

    #[test]
    fn monotone_conflicts() {
        let h = vec![QueryRecord { agent: 0, bundle: Bundle::range(0..2), value: Value::from_u64(5) }];
        assert!(monotone_conflict(&h, 0, &Bundle::range(0..3), &Value::from_u64(4)).is_some());
        assert!(monotone_conflict(&h, 0, &Bundle::range(0..1), &Value::from_u64(6)).is_some());
        assert!(monotone_conflict(&h, 0, &Bundle::range(0..3), &Value::from_u64(5)).is_none());
        assert!(monotone_conflict(&h, 1, &Bundle::range(0..3), &Value::from_u64(0)).is_none());
    }
}
