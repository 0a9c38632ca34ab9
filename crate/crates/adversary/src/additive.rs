//! Two identical additive agents: deciding whether an envy-free allocation
//! exists needs `m` queries.
//!
//! Each new independent query on `s` goods is answered within `delta` of
//! `s`, avoiding the finitely many answers that would force some signed sum
//! of the goods to zero. After at most `m - 1` such answers, one more
//! balanced constraint can be fixed either to zero (a perfect split exists)
//! or away from every forced zero (no split exists).

use std::collections::HashSet;

use fairq_core::{AgentId, Bundle, QueryError, Value, ValuationSpec, Weights};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::{q, RationalMatrix, Rref, Q};
use crate::monotonic::subsets_of_size;
use crate::shared::AdaptiveRule;
use crate::{AdversaryError, World};

#[derive(Clone)]
pub struct AdditiveEfAdversary {
    m: usize,
    delta: Q,
    /// Rows `[v | v.x]` in reduced row-echelon form.
    basis: Rref,
}

impl AdditiveEfAdversary {
    pub fn new(m: usize) -> Result<Self, AdversaryError> {
        if m == 0 || m % 2 == 1 || m > 20 {
            return Err(AdversaryError::Unsupported(format!("needs an even number of goods in 2..=20, got {m}")));
        }
        // |(M^-1)_ij| <= (m-1)! for invertible sign matrices, so any z with
        // |z_i| < 1 / (2 m!) gives |y_i| < 1/2.
        let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
        let delta = Q::new(BigInt::one(), fact * 2);
        Ok(AdditiveEfAdversary { m, delta, basis: RationalMatrix::new(m + 1).rref_upto(m) })
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> &Q {
        &self.delta
    }

    /// Number of linearly independent queries answered.
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// Independent queries still allowed before the game is over.
    pub fn remaining(&self) -> usize {
        self.m - 1 - self.rank()
    }

    fn indicator(&self, bundle: &Bundle) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.m];
        for g in bundle.goods() {
            v[g.index()] = Q::one();
        }
        v
    }

    fn determined(&self, v: &[Q]) -> Option<Q> {
        let coeffs = self.basis.coordinates(v)?;
        Some(coeffs.iter().zip(self.basis.matrix.rows()).map(|(c, r)| c * &r[self.m]).sum())
    }

    /// Basis rows extended with an unknown: `[v | alpha | beta]` means
    /// `v.x = alpha + beta * t`, where `new` has value `t`.
    fn with_unknown(&self, new: &[Q]) -> Rref {
        let m = self.m;
        let mut rows: Vec<Vec<Q>> = self
            .basis
            .matrix
            .rows()
            .iter()
            .map(|r| {
                let mut row = r.clone();
                row.push(Q::zero());
                row
            })
            .collect();
        let mut last = new.to_vec();
        last.push(Q::zero());
        last.push(Q::one());
        rows.push(last);
        RationalMatrix::from_rows(m + 2, rows).rref_upto(m)
    }

    /// Values of `t` that would force `w.x = 0` for a sign vector `w`.
    fn forced_zeros(&self, ext: &Rref) -> HashSet<Q> {
        let m = self.m;
        let mut out = HashSet::new();
        for_each_sign_vector(ext, m, |sum| {
            let (alpha, beta) = (&sum[m], &sum[m + 1]);
            if !beta.is_zero() {
                out.insert(-alpha / beta);
            }
        });
        out
    }

    fn settle(&mut self, ext: &Rref, t: &Q) {
        let m = self.m;
        let rows = ext
            .matrix
            .rows()
            .iter()
            .map(|r| {
                let mut row = r[..m].to_vec();
                row.push(&r[m] + &r[m + 1] * t);
                row
            })
            .collect();
        self.basis = Rref { matrix: RationalMatrix::from_rows(m + 1, rows), pivots: ext.pivots.clone(), leftover: 0 };
    }

    fn answer_independent(&mut self, v: &[Q], size: usize) -> Q {
        let ext = self.with_unknown(v);
        let forbidden = self.forced_zeros(&ext);
        let s = q(size as i64);
        let a = near_zero(&self.delta).map(|t| &s + t).find(|a| !forbidden.contains(a)).expect("finitely many forbidden");
        self.settle(&ext, &a);
        a
    }

    /// Concrete weights consistent with every answer, padded with singleton
    /// queries up to `m - 1` independent ones. Every weight is positive.
    pub fn materialize(&self, world: World) -> Result<ValuationSpec, AdversaryError> {
        let m = self.m;
        let mut st = self.clone();
        for g in 0..m {
            if st.rank() == m - 1 {
                break;
            }
            let mut e = vec![Q::zero(); m];
            e[g] = Q::one();
            if st.determined(&e).is_none() {
                st.answer_independent(&e, 1);
            }
        }
        // the known constraints span a hyperplane with this normal
        let free = st.basis.free_columns(m)[0];
        let mut normal = vec![Q::zero(); m];
        normal[free] = Q::one();
        for (row, &p) in st.basis.matrix.rows().iter().zip(&st.basis.pivots) {
            normal[p] = -row[free].clone();
        }
        let balanced = subsets_of_size(m, m / 2)
            .into_iter()
            .map(|plus| (0..m).map(|g| if plus.contains(fairq_core::GoodId::new(g)) { Q::one() } else { -Q::one() }).collect::<Vec<Q>>())
            .find(|w| w.iter().zip(&normal).map(|(a, b)| a * b).sum::<Q>() != Q::zero())
            .expect("balanced vectors span the sum-zero hyperplane");
        let ext = st.with_unknown(&balanced);
        let t = match world {
            World::EnvyFree => Q::zero(),
            World::NoEnvyFree => {
                let forbidden = st.forced_zeros(&ext);
                near_zero(&self.delta).find(|t| !forbidden.contains(t)).expect("finitely many forbidden")
            }
        };
        let mut x = vec![Q::zero(); m];
        for (row, &p) in ext.matrix.rows().iter().zip(&ext.pivots) {
            x[p] = &row[m] + &row[m + 1] * &t;
        }
        if x.iter().any(|v| !v.is_positive()) {
            return Err(AdversaryError::Internal("materialized weight is not positive".into()));
        }
        let weights = x.into_iter().map(Value::from_ratio).collect::<Result<Vec<_>, _>>().map_err(|e| AdversaryError::Internal(e.to_string()))?;
        Ok(ValuationSpec::Additive { weights: Weights::from_values(weights) })
    }
}

impl AdaptiveRule for AdditiveEfAdversary {
    fn respond(&mut self, _agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        let v = self.indicator(bundle);
        let a = match self.determined(&v) {
            Some(a) => a,
            None if self.rank() + 1 >= self.m => return Err(QueryError::Exhausted(self.rank())),
            None => self.answer_independent(&v, bundle.len()),
        };
        Value::from_ratio(a).map_err(|e| QueryError::Contract(e.to_string()))
    }
}

/// Offsets in `(-delta, delta)`, smallest denominator first: `0`, `±delta/2`,
/// `±delta/3`, `±2delta/3`, ...
fn near_zero(delta: &Q) -> impl Iterator<Item = Q> + '_ {
    (1i64..).flat_map(move |den| {
        (0..den).flat_map(move |num| {
            let f = Q::new(BigInt::from(num), BigInt::from(den));
            let out: Vec<Q> = if num.gcd(&den) != 1 {
                vec![]
            } else if num == 0 {
                vec![Q::zero()]
            } else {
                vec![delta * &f, -(delta * &f)]
            };
            out
        })
    })
}

/// Calls `f` with `[w | extras]` for every `w` in the row space whose first
/// `m` entries are all `±1`, walking sign patterns on the pivots in Gray
/// code order.
pub(crate) fn for_each_sign_vector(rref: &Rref, m: usize, mut f: impl FnMut(&[Q])) {
    let rows = rref.matrix.rows();
    let k = rows.len();
    if k == 0 {
        return;
    }
    let width = rref.matrix.cols();
    let mut signs = vec![1i8; k];
    let mut sum: Vec<Q> = (0..width).map(|c| rows.iter().map(|r| r[c].clone()).sum()).collect();
    let non_pivot: Vec<usize> = (0..m).filter(|c| !rref.pivots.contains(c)).collect();
    let (one, minus) = (Q::one(), -Q::one());
    let is_sign = |sum: &[Q]| non_pivot.iter().all(|&c| sum[c] == one || sum[c] == minus);
    if is_sign(&sum) {
        f(&sum);
    }
    for i in 1u64..(1u64 << k) {
        let b = i.trailing_zeros() as usize;
        signs[b] = -signs[b];
        let twice = q(2 * signs[b] as i64);
        for (s, r) in sum.iter_mut().zip(&rows[b]) {
            if !r.is_zero() {
                *s += &twice * r;
            }
        }
        if is_sign(&sum) {
            f(&sum);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_by_denominator() {
        let d = q(6);
        let first: Vec<Q> = near_zero(&d).take(7).collect();
        assert_eq!(first, vec![q(0), q(3), q(-3), q(2), q(-2), q(4), q(-4)]);
    }

    #[test]
    fn repeated_and_dependent_queries_are_determined() {
        let mut a = AdditiveEfAdversary::new(4).unwrap();
        let x = a.respond(0, &Bundle::range(0..2)).unwrap();
        assert_eq!(a.respond(1, &Bundle::range(0..2)).unwrap(), x);
        let y = a.respond(0, &Bundle::range(0..1)).unwrap();
        let z = a.respond(0, &Bundle::range(1..2)).unwrap();
        assert_eq!(y + z, x);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn fourth_independent_query_is_refused() {
        let mut a = AdditiveEfAdversary::new(4).unwrap();
        for g in 0..3 {
            a.respond(0, &Bundle::range(g..g + 1)).unwrap();
        }
        assert_eq!(a.respond(0, &Bundle::range(3..4)), Err(QueryError::Exhausted(3)));
        assert!(a.respond(0, &Bundle::range(0..3)).is_ok());
    }
}
