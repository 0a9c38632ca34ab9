//! Two identical additive agents: finding an EFX allocation needs about
//! `m/2` queries.
//!
//! Every bundle is reported worth its size. Once the driver commits to an
//! allocation, [`EfxAdversary::refute`] builds weights consistent with those
//! answers under which the allocation is not EFX.

use fairq_core::{AgentId, Allocation, Bundle, QueryError, Value, ValuationSpec, Weights};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::matrix::{q, RationalMatrix, Q};
use crate::shared::AdaptiveRule;
use crate::AdversaryError;

pub struct EfxAdversary {
    m: usize,
    asked: Vec<Bundle>,
}

impl EfxAdversary {
    pub fn new(m: usize) -> Result<Self, AdversaryError> {
        if m < 3 || m % 2 == 0 {
            return Err(AdversaryError::Unsupported(format!("needs an odd number of goods, at least 3, got {m}")));
        }
        Ok(EfxAdversary { m, asked: Vec::new() })
    }

    /// Queries answered before the game is over: `(m - 1) / 2 - 1`.
    pub fn budget(&self) -> usize {
        ((self.m - 1) / 2).saturating_sub(1)
    }

    pub fn asked(&self) -> &[Bundle] {
        &self.asked
    }

    /// Weights matching every answer under which `alloc` is not EFX.
    pub fn refute(&self, alloc: &Allocation) -> Result<ValuationSpec, AdversaryError> {
        if alloc.agents() != 2 {
            return Err(AdversaryError::Contract("expected an allocation to two agents".into()));
        }
        let m = self.m;
        let k = (m - 1) / 2;
        let (b0, b1) = (alloc.bundle(0), alloc.bundle(1));
        let (small, large) = if b0.len() <= b1.len() { (b0, b1) } else { (b1, b0) };
        let mut x = vec![Q::one(); m];
        if small.len() == k {
            let vars: Vec<usize> = large.to_indices();
            let col = |g: usize| vars.iter().position(|&v| v == g);
            let width = vars.len();
            // constraints on the larger bundle: each answer minus its part in
            // the smaller one, plus the total
            let mut rows = Vec::new();
            for b in &self.asked {
                let mut row = vec![Q::zero(); width + 1];
                for g in b.goods() {
                    if let Some(c) = col(g.index()) {
                        row[c] = Q::one();
                        row[width] += Q::one();
                    }
                }
                rows.push(row);
            }
            let mut total = vec![Q::one(); width + 1];
            total[width] = q(width as i64);
            rows.push(total);
            let rref = RationalMatrix::from_rows(width + 1, rows).rref_upto(width);
            let free = *rref
                .free_columns(width)
                .first()
                .ok_or_else(|| AdversaryError::Contract("too many queries to leave a free weight".into()))?;
            // leading weights move by -coefficient * (x_free - 1)
            let mut eps = Q::new(BigInt::one(), BigInt::from(10));
            loop {
                let mut y = vec![Q::one(); width];
                y[free] = Q::one() - &eps;
                for (row, &p) in rref.matrix.rows().iter().zip(&rref.pivots) {
                    y[p] = &row[width] - (0..width).filter(|c| !rref.pivots.contains(c)).map(|c| &row[c] * &y[c]).sum::<Q>();
                }
                if y.iter().all(|v| *v >= Q::zero()) {
                    for (c, &g) in vars.iter().enumerate() {
                        x[g] = y[c].clone();
                    }
                    break;
                }
                eps /= q(2);
            }
        } else if small.len() > k {
            return Err(AdversaryError::Contract("allocation does not cover the goods".into()));
        }
        let weights = x.into_iter().map(Value::from_ratio).collect::<Result<Vec<_>, _>>().map_err(|e| AdversaryError::Internal(e.to_string()))?;
        Ok(ValuationSpec::Additive { weights: Weights::from_values(weights) })
    }
}

impl AdaptiveRule for EfxAdversary {
    fn respond(&mut self, _agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        if self.asked.len() >= self.budget() {
            return Err(QueryError::Exhausted(self.asked.len()));
        }
        self.asked.push(bundle.clone());
        Ok(Value::from_u64(bundle.len() as u64))
    }
}
