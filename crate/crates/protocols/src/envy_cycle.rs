//! Envy-cycle elimination, one good at a time or in batches.
//!
//! Bundles live in slots; agents point at slots. Rotating a cycle only
//! repoints agents, so it needs no queries.

use std::collections::HashMap;

use fairq_core::audit::EnvyGraph;
use fairq_core::{Allocation, Bundle, Line, QueryError, Value};

use crate::probe::Probe;
use crate::search::leftmost_true;

struct EnvyState {
    slots: Vec<Bundle>,
    /// `slot_of[agent]`
    slot_of: Vec<usize>,
    /// `vals[agent][slot]`
    vals: Vec<Vec<Value>>,
}

impl EnvyState {
    fn new(n: usize) -> Self {
        EnvyState {
            slots: vec![Bundle::empty(); n],
            slot_of: (0..n).collect(),
            vals: vec![vec![Value::zero(); n]; n],
        }
    }

    fn graph(&self) -> EnvyGraph {
        let n = self.slots.len();
        let m: Vec<Vec<Value>> = (0..n)
            .map(|i| (0..n).map(|j| self.vals[i][self.slot_of[j]].clone()).collect())
            .collect();
        EnvyGraph::from_values(&m)
    }

    fn source(&self) -> Result<usize, QueryError> {
        self.graph()
            .source()
            .ok_or_else(|| QueryError::Contract("envy graph has no source".into()))
    }

    fn eliminate_cycles(&mut self) {
        while let Some(cycle) = self.graph().find_cycle() {
            let next: Vec<usize> = (0..cycle.len()).map(|k| self.slot_of[cycle[(k + 1) % cycle.len()]]).collect();
            for (k, &a) in cycle.iter().enumerate() {
                self.slot_of[a] = next[k];
            }
        }
    }

    fn allocation(self, m: usize) -> Result<Allocation, QueryError> {
        let bundles = self.slot_of.iter().map(|&s| self.slots[s].clone()).collect();
        Ok(Allocation::new(bundles, m)?)
    }
}

/// Goods go one at a time, in `order`, to the lowest-index agent nobody
/// envies; each step re-values only the bundle that grew.
pub fn envy_cycle_elimination(p: &mut Probe, order: &Line) -> Result<Allocation, QueryError> {
    let n = p.agents();
    let mut st = EnvyState::new(n);
    for g in order.iter() {
        let src = st.source()?;
        let slot = st.slot_of[src];
        st.slots[slot] = st.slots[slot].with(g);
        for i in 0..n {
            st.vals[i][slot] = p.value(i, &st.slots[slot])?;
        }
        st.eliminate_cycles();
    }
    st.allocation(p.goods())
}

/// Same allocation as [`envy_cycle_elimination`], but the source agent takes
/// every good up to the first one that changes some agent's value of her
/// bundle, located by binary search.
pub fn envy_cycle_batched(p: &mut Probe, order: &Line) -> Result<Allocation, QueryError> {
    let n = p.agents();
    let m = order.len();
    let mut st = EnvyState::new(n);
    let mut pos = 0;
    while pos < m {
        let src = st.source()?;
        let slot = st.slot_of[src];
        let mut seen: HashMap<usize, Vec<Value>> = HashMap::new();
        let hit = leftmost_true(pos..m, |q| {
            let grown = st.slots[slot].union(&order.block(pos..q + 1)?);
            let mut vs = Vec::with_capacity(n);
            for i in 0..n {
                vs.push(p.value(i, &grown)?);
            }
            let changed = vs.iter().enumerate().any(|(i, v)| *v > st.vals[i][slot]);
            seen.insert(q, vs);
            Ok::<_, QueryError>(changed)
        })?;
        let end = hit.map_or(m, |q| q + 1);
        st.slots[slot] = st.slots[slot].union(&order.block(pos..end)?);
        if let Some(q) = hit {
            st.vals.iter_mut().zip(seen.remove(&q).expect("evaluated")).for_each(|(row, v)| row[slot] = v);
        }
        pos = end;
        st.eliminate_cycles();
    }
    st.allocation(p.goods())
}
