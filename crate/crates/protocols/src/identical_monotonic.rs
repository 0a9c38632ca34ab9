//! Contiguous EF1 for identical monotone integer valuations.
//!
//! A block `G` meets level `x` when `w(G) <= x <= u(G)`, where `w(G)` is the
//! smaller value of `G` minus one of its end goods. If every block meets the
//! same level, no agent envies another block after dropping one of its ends.
//!
//! For fixed `x` the ends reachable after `k` blocks form an interval of
//! positions, advanced by the "fewest goods" and "most goods" greedy steps.

use std::ops::Range;

use fairq_core::{AgentId, Bundle, Line, QueryError};
use serde::{Deserialize, Serialize};

use crate::probe::Probe;
use crate::search::{leftmost_true, rightmost_true};

/// Blocks of the line, in order, all meeting `level`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPartition {
    pub spans: Vec<Range<usize>>,
    pub bundles: Vec<Bundle>,
    pub level: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    TooSmall,
    Feasible,
    TooBig,
}

struct Blocks<'p, 'a> {
    p: &'p mut Probe<'a>,
    agent: AgentId,
    line: &'p Line,
    k_max: u64,
}

impl Blocks<'_, '_> {
    fn m(&self) -> usize {
        self.line.len()
    }

    fn u(&mut self, l: usize, r: usize) -> Result<u64, QueryError> {
        let v = self.p.value(self.agent, &self.line.block(l..r)?)?;
        match v.to_u64() {
            Some(x) if v.is_integer() && x <= self.k_max => Ok(x),
            _ => Err(QueryError::Contract(format!("value {v} is not an integer in 0..={}", self.k_max))),
        }
    }

    fn w(&mut self, l: usize, r: usize) -> Result<u64, QueryError> {
        if r - l <= 1 {
            return Ok(0);
        }
        Ok(self.u(l + 1, r)?.min(self.u(l, r - 1)?))
    }

    /// Last start from which the rest of the line is worth at least `x`.
    fn z(&mut self, x: u64) -> Result<Option<usize>, QueryError> {
        let m = self.m();
        if x == 0 {
            return Ok(Some(m));
        }
        rightmost_true(0..m, |s| Ok(self.u(s, m)? >= x))
    }

    /// Shortest block from `s` worth at least `x`; needs `s <= z(x)`.
    fn a(&mut self, s: usize, x: u64) -> Result<usize, QueryError> {
        let m = self.m();
        if x == 0 {
            return Ok(s);
        }
        Ok(leftmost_true(s + 1..m, |e| Ok::<_, QueryError>(self.u(s, e)? >= x))?.unwrap_or(m))
    }

    /// Longest block from `s` with `w <= x`.
    fn b(&mut self, s: usize, x: u64) -> Result<usize, QueryError> {
        let m = self.m();
        if s >= m {
            return Ok(m);
        }
        Ok(rightmost_true(s + 2..m + 1, |e| Ok::<_, QueryError>(self.w(s, e)? <= x))?.unwrap_or(s + 1))
    }

    /// Ends reachable from `start` with `steps` blocks at level `x`.
    fn reach(&mut self, start: usize, steps: usize, x: u64, z: usize) -> Result<Option<(usize, usize)>, QueryError> {
        let (mut lo, mut hi) = (start, start);
        for _ in 0..steps {
            let h = hi.min(z);
            if lo > h {
                return Ok(None);
            }
            (lo, hi) = (self.a(lo, x)?, self.b(h, x)?);
        }
        Ok(Some((lo, hi)))
    }

    fn classify(&mut self, start: usize, steps: usize, x: u64) -> Result<Verdict, QueryError> {
        let Some(z) = self.z(x)? else {
            return Ok(Verdict::TooBig);
        };
        Ok(match self.reach(start, steps, x, z)? {
            None => Verdict::TooBig,
            Some((_, hi)) if hi == self.m() => Verdict::Feasible,
            Some(_) => Verdict::TooSmall,
        })
    }

    fn level(&mut self, n: usize) -> Result<u64, QueryError> {
        let (mut lo, mut hi) = (-1i128, self.k_max as i128 + 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match self.classify(0, n, mid as u64)? {
                Verdict::Feasible => return Ok(mid as u64),
                Verdict::TooSmall => lo = mid,
                Verdict::TooBig => hi = mid,
            }
        }
        Err(QueryError::Contract("no level admits a partition into blocks".into()))
    }

    fn end_of_block(&mut self, s: usize, remaining: usize, x: u64) -> Result<usize, QueryError> {
        let (mut lo, mut hi) = (self.a(s, x)? as i128, self.b(s, x)? as i128);
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            match self.classify(mid as usize, remaining, x)? {
                Verdict::Feasible => return Ok(mid as usize),
                Verdict::TooSmall => lo = mid + 1,
                Verdict::TooBig => hi = mid - 1,
            }
        }
        Err(QueryError::Contract(format!("no end for the block starting at {s}")))
    }
}

/// Splits `line` into `n` contiguous blocks that all meet one level, using
/// the valuation of `agent` as everyone's valuation. Values must be integers
/// in `0..=k_max`.
pub fn contiguous_identical_monotonic(
    p: &mut Probe,
    agent: AgentId,
    n: usize,
    k_max: u64,
    line: &Line,
) -> Result<LevelPartition, QueryError> {
    if n == 0 {
        return Err(QueryError::Contract("need at least one agent".into()));
    }
    let m = line.len();
    if m == 0 {
        return Ok(LevelPartition { spans: vec![0..0; n], bundles: vec![Bundle::empty(); n], level: 0 });
    }
    let mut bl = Blocks { p, agent, line, k_max };
    let x = bl.level(n)?;
    let mut spans = Vec::with_capacity(n);
    let mut s = 0;
    for k in 0..n {
        let e = if k + 1 == n { m } else { bl.end_of_block(s, n - k - 1, x)? };
        spans.push(s..e);
        s = e;
    }
    for r in &spans {
        let (u, w) = (bl.u(r.start, r.end)?, bl.w(r.start, r.end)?);
        if !(w <= x && x <= u) {
            return Err(QueryError::Contract(format!("block {r:?} misses level {x}")));
        }
    }
    let bundles = spans.iter().map(|r| line.block(r.clone())).collect::<Result<_, _>>()?;
    Ok(LevelPartition { spans, bundles, level: x })
}
