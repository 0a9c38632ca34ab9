//! Two identical monotone agents: deciding whether an envy-free allocation
//! exists needs every half-size subset to be asked.
//!
//! Sizes other than `m/2` are worth `2s`, so only equal splits can be
//! envy-free. Half-size subsets get distinct values near `m`; as long as one
//! is unasked, both answers to the decision problem remain possible.

use std::collections::HashMap;

use fairq_core::{AgentId, Bundle, QueryError, TableEntry, Value, ValuationSpec};

use crate::shared::AdaptiveRule;
use crate::{AdversaryError, World};

pub struct MonotonicEfAdversary {
    m: usize,
    half_count: u64,
    /// Half-size bundles asked so far, with their offset index.
    asked: HashMap<Bundle, u64>,
}

impl MonotonicEfAdversary {
    pub fn new(m: usize) -> Result<Self, AdversaryError> {
        if m == 0 || m % 2 == 1 || m > 20 {
            return Err(AdversaryError::Unsupported(format!("needs an even number of goods in 2..=20, got {m}")));
        }
        Ok(MonotonicEfAdversary { m, half_count: binomial(m as u64, m as u64 / 2), asked: HashMap::new() })
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    /// Number of distinct half-size subsets.
    pub fn half_subsets(&self) -> u64 {
        self.half_count
    }

    pub fn asked_half_subsets(&self) -> usize {
        self.asked.len()
    }

    /// Both worlds stay possible while some half-size subset is unasked.
    pub fn worlds_open(&self) -> bool {
        (self.asked.len() as u64) < self.half_count
    }

    fn offset(&self, i: i64) -> Value {
        // i-th offset is i / (2 C(m, m/2)); negative ones are for unasked sets
        let den = 2 * self.half_count as i64;
        let m = self.m as i64;
        Value::new(m * den + i, den).expect("positive")
    }

    fn size_value(&self, s: usize) -> Value {
        Value::from_u64(2 * s as u64)
    }

    /// A full table consistent with every answer so far. `world` must be
    /// given while both are open.
    pub fn materialize(&self, world: Option<World>) -> Result<ValuationSpec, AdversaryError> {
        let world = match (world, self.worlds_open()) {
            (Some(w), true) => w,
            (None, true) => return Err(AdversaryError::WorldRequired),
            (None, false) | (Some(World::NoEnvyFree), false) => World::NoEnvyFree,
            (Some(World::EnvyFree), false) => return Err(AdversaryError::WorldClosed(World::EnvyFree)),
        };
        let m = self.m;
        let all = Bundle::all(m);
        let mut half: HashMap<Bundle, Value> = self.asked.iter().map(|(b, &i)| (b.clone(), self.offset(i as i64))).collect();
        let mut fresh = 0i64;
        let mut unasked: Vec<Bundle> = subsets_of_size(m, m / 2).into_iter().filter(|b| !self.asked.contains_key(b)).collect();
        if world == World::EnvyFree {
            let s = unasked.remove(0);
            let c = all.difference(&s);
            let v = half.get(&c).cloned().unwrap_or_else(|| self.offset(0));
            unasked.retain(|b| *b != c);
            half.insert(c, v.clone());
            half.insert(s, v);
        }
        for b in unasked {
            fresh += 1;
            half.insert(b, self.offset(-fresh));
        }
        let entries = (0..1usize << m)
            .map(|mask| {
                let subset: Vec<usize> = (0..m).filter(|g| mask >> g & 1 == 1).collect();
                let value = if subset.len() == m / 2 {
                    half[&Bundle::from_indices(&subset).expect("sorted")].clone()
                } else {
                    self.size_value(subset.len())
                };
                TableEntry { subset, value }
            })
            .collect();
        Ok(ValuationSpec::Table { entries })
    }
}

impl AdaptiveRule for MonotonicEfAdversary {
    fn respond(&mut self, _agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        let s = bundle.len();
        if 2 * s != self.m {
            return Ok(self.size_value(s));
        }
        let next = self.asked.len() as u64 + 1;
        let i = *self.asked.entry(bundle.clone()).or_insert(next);
        Ok(self.offset(i as i64))
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub(crate) fn subsets_of_size(m: usize, k: usize) -> Vec<Bundle> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Bundle>) {
        if cur.len() == k {
            out.push(Bundle::from_indices(cur).expect("sorted"));
            return;
        }
        for g in start..=m - (k - cur.len()) {
            cur.push(g);
            rec(g + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}
