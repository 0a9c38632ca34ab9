//! `n` agents with binary valuations: EF1 needs about `(n/2) log(m/n)`
//! queries.
//!
//! Agents `2i` and `2i + 1` share a valuation worth 1 on two hidden goods in
//! a candidate set `G_i`. Each query keeps the larger half of `G_i`
//! consistent with the answer, so `G_i` shrinks at most by half. With an
//! odd `n` the last agent values nothing.

use fairq_core::{AgentId, Allocation, Bundle, QueryError, Value, ValuationSpec};
use serde::{Deserialize, Serialize};

use crate::shared::AdaptiveRule;
use crate::AdversaryError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairState {
    pub candidates: Bundle,
    /// Queries that shrank the candidates.
    pub charged: usize,
    /// Candidate set sizes after each charged query.
    pub sizes: Vec<usize>,
}

pub struct PairsAdversary {
    n: usize,
    m: usize,
    pairs: Vec<PairState>,
}

impl PairsAdversary {
    pub fn new(n: usize, m: usize) -> Result<Self, AdversaryError> {
        if n < 2 || m < 2 {
            return Err(AdversaryError::Unsupported(format!("needs at least two agents and two goods, got n={n}, m={m}")));
        }
        let pairs = (0..n / 2).map(|_| PairState { candidates: Bundle::all(m), charged: 0, sizes: vec![m] }).collect();
        Ok(PairsAdversary { n, m, pairs })
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[PairState] {
        &self.pairs
    }

    pub fn total_charged(&self) -> usize {
        self.pairs.iter().map(|p| p.charged).sum()
    }

    /// Whether every pair is down to at most `n` candidates, the point at
    /// which an EF1 allocation can be certain to split them.
    pub fn settled(&self) -> bool {
        self.pairs.iter().all(|p| p.candidates.len() <= self.n)
    }

    /// Binary valuations consistent with all answers. With `against`, each
    /// pair's two goods go into one bundle of that allocation when the
    /// candidates allow it.
    pub fn materialize(&self, against: Option<&Allocation>) -> Vec<ValuationSpec> {
        let mut specs = Vec::with_capacity(self.n);
        for p in &self.pairs {
            let goods = p.candidates.to_indices();
            let mut ones = vec![goods[0], goods[1]];
            if let Some(a) = against {
                if let Some(b) = a.bundles().iter().find(|b| b.intersection(&p.candidates).len() >= 2) {
                    ones = b.intersection(&p.candidates).to_indices()[..2].to_vec();
                }
            }
            specs.push(ValuationSpec::Binary { ones: ones.clone() });
            specs.push(ValuationSpec::Binary { ones });
        }
        if self.n % 2 == 1 {
            specs.push(ValuationSpec::Binary { ones: vec![] });
        }
        specs
    }

    pub fn goods(&self) -> usize {
        self.m
    }
}

impl AdaptiveRule for PairsAdversary {
    fn respond(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        let Some(p) = self.pairs.get_mut(agent / 2) else {
            return Ok(Value::zero());
        };
        let g = &p.candidates;
        let inside = g.intersection(bundle);
        if g.len() <= 2 {
            return Ok(Value::from_u64(inside.len() as u64));
        }
        let answer = if 2 * inside.len() >= g.len() {
            p.candidates = inside;
            2
        } else {
            p.candidates = g.difference(bundle);
            0
        };
        p.charged += 1;
        p.sizes.push(p.candidates.len());
        Ok(Value::from_u64(answer))
    }
}
