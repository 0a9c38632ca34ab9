use std::collections::HashMap;

use fairq_core::{AgentId, Bundle, QueryError, QuerySource, Value};

/// A protocol's view of the oracles, with an optional memo table.
///
/// The empty bundle is worth 0 and is never sent as a query. With the memo
/// on, a repeated `(agent, bundle)` pair is answered from the table.
pub struct Probe<'a> {
    src: &'a mut dyn QuerySource,
    memo: Option<HashMap<(AgentId, Bundle), Value>>,
}

impl<'a> Probe<'a> {
    pub fn new(src: &'a mut dyn QuerySource) -> Self {
        Probe { src, memo: Some(HashMap::new()) }
    }

    /// Every non-empty request reaches the source.
    pub fn uncached(src: &'a mut dyn QuerySource) -> Self {
        Probe { src, memo: None }
    }

    pub fn agents(&self) -> usize {
        self.src.agents()
    }

    pub fn goods(&self) -> usize {
        self.src.goods()
    }

    pub fn value(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        if bundle.is_empty() {
            return Ok(Value::zero());
        }
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&(agent, bundle.clone()))) {
            return Ok(v.clone());
        }
        let v = self.src.query(agent, bundle)?;
        if let Some(m) = self.memo.as_mut() {
            m.insert((agent, bundle.clone()), v.clone());
        }
        Ok(v)
    }
}
