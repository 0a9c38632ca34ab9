//! Exact fairness predicates and brute-force existence oracles.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::bundle::Bundle;
use crate::error::{AuditError, ModelError};
use crate::instance::Instance;
use crate::line::Line;
use crate::valuation::Valuation;
use crate::value::Value;

pub const DEFAULT_BUDGET: u128 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub ef: bool,
    pub efx: bool,
    pub ef1: bool,
    pub proportional: bool,
}

/// Compiled valuations of every agent, for repeated checks.
#[derive(Clone, Debug)]
pub struct Profile {
    m: usize,
    vals: Vec<Arc<Valuation>>,
}

impl Profile {
    pub fn new(m: usize, vals: Vec<Arc<Valuation>>) -> Self {
        Profile { m, vals }
    }

    pub fn of(instance: &Instance) -> Result<Self, ModelError> {
        Ok(Profile { m: instance.m, vals: instance.compile()? })
    }

    pub fn agents(&self) -> usize {
        self.vals.len()
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn value(&self, agent: usize, bundle: &Bundle) -> Result<Value, AuditError> {
        Ok(self.vals[agent].value(bundle)?)
    }

    fn check(&self, alloc: &Allocation) -> Result<(), AuditError> {
        Allocation::with_agents(alloc.bundles().to_vec(), self.vals.len(), self.m)?;
        Ok(())
    }

    /// `v[i][j] = u_i(A_j)`.
    pub fn value_matrix(&self, alloc: &Allocation) -> Result<Vec<Vec<Value>>, AuditError> {
        self.vals
            .iter()
            .map(|v| alloc.bundles().iter().map(|b| Ok(v.value(b)?)).collect())
            .collect()
    }

    pub fn is_envy_free(&self, alloc: &Allocation) -> Result<bool, AuditError> {
        self.check(alloc)?;
        let v = self.value_matrix(alloc)?;
        Ok((0..v.len()).all(|i| v[i].iter().all(|x| *x <= v[i][i])))
    }

    /// Some removal from each envied bundle kills the envy.
    pub fn is_ef1(&self, alloc: &Allocation) -> Result<bool, AuditError> {
        self.check(alloc)?;
        let v = self.value_matrix(alloc)?;
        for i in 0..v.len() {
            for (j, bj) in alloc.bundles().iter().enumerate() {
                if v[i][j] <= v[i][i] {
                    continue;
                }
                if !self.survives_removal(i, bj, &v[i][j], &v[i][i], Quantifier::Some)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Every removal from each envied bundle kills the envy.
    pub fn is_efx(&self, alloc: &Allocation) -> Result<bool, AuditError> {
        self.check(alloc)?;
        let v = self.value_matrix(alloc)?;
        for i in 0..v.len() {
            for (j, bj) in alloc.bundles().iter().enumerate() {
                if v[i][j] <= v[i][i] {
                    continue;
                }
                if !self.survives_removal(i, bj, &v[i][j], &v[i][i], Quantifier::Every)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Like EF1, but the removed good must be an end of the envied block on `line`.
    pub fn is_ef1_endpoint(&self, alloc: &Allocation, line: &Line) -> Result<bool, AuditError> {
        self.check(alloc)?;
        let v = self.value_matrix(alloc)?;
        for i in 0..v.len() {
            for (j, bj) in alloc.bundles().iter().enumerate() {
                if v[i][j] <= v[i][i] {
                    continue;
                }
                let Some(span) = line.block_span(bj) else { return Ok(false) };
                let ends = [span.start, span.end - 1];
                let mut ok = false;
                for p in ends {
                    let g = line.good_at(p)?;
                    if self.value(i, &bj.without(g))? <= v[i][i] {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn is_proportional(&self, alloc: &Allocation) -> Result<bool, AuditError> {
        self.check(alloc)?;
        let n = self.vals.len() as u64;
        let all = Bundle::all(self.m);
        for (i, v) in self.vals.iter().enumerate() {
            if v.value(alloc.bundle(i))?.scale(n) < v.value(&all)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn report(&self, alloc: &Allocation) -> Result<FairnessReport, AuditError> {
        Ok(FairnessReport {
            ef: self.is_envy_free(alloc)?,
            efx: self.is_efx(alloc)?,
            ef1: self.is_ef1(alloc)?,
            proportional: self.is_proportional(alloc)?,
        })
    }

    fn survives_removal(&self, i: usize, bj: &Bundle, vij: &Value, vii: &Value, q: Quantifier) -> Result<bool, AuditError> {
        let val = &self.vals[i];
        if val.is_additive() {
            // u(B \ g) = u(B) - w(g); the extreme weight decides
            let mut pick: Option<Value> = None;
            for g in bj.goods() {
                let w = val.weight(g).expect("additive weight");
                pick = Some(match (pick, q) {
                    (None, _) => w,
                    (Some(p), Quantifier::Some) => p.max(w),
                    (Some(p), Quantifier::Every) => p.min(w),
                });
            }
            let Some(w) = pick else { return Ok(true) };
            return Ok(vij.checked_sub(&w).is_some_and(|rest| rest <= *vii));
        }
        for g in bj.goods() {
            let ok = val.value(&bj.without(g))? <= *vii;
            match q {
                Quantifier::Some if ok => return Ok(true),
                Quantifier::Every if !ok => return Ok(false),
                _ => {}
            }
        }
        Ok(matches!(q, Quantifier::Every) || bj.is_empty())
    }
}

#[derive(Clone, Copy)]
enum Quantifier {
    Some,
    Every,
}

pub fn is_envy_free(instance: &Instance, alloc: &Allocation) -> Result<bool, AuditError> {
    Profile::of(instance)?.is_envy_free(alloc)
}

pub fn is_ef1(instance: &Instance, alloc: &Allocation) -> Result<bool, AuditError> {
    Profile::of(instance)?.is_ef1(alloc)
}

pub fn is_efx(instance: &Instance, alloc: &Allocation) -> Result<bool, AuditError> {
    Profile::of(instance)?.is_efx(alloc)
}

pub fn is_proportional(instance: &Instance, alloc: &Allocation) -> Result<bool, AuditError> {
    Profile::of(instance)?.is_proportional(alloc)
}

pub fn fairness_report(instance: &Instance, alloc: &Allocation) -> Result<FairnessReport, AuditError> {
    Profile::of(instance)?.report(alloc)
}

fn pow_checked(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Whether any allocation is envy-free, by trying all `n^m` assignments.
pub fn brute_force_ef_exists(instance: &Instance, budget: u128) -> Result<bool, AuditError> {
    let (n, m) = (instance.n, instance.m);
    let needed = pow_checked(n as u128, m).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(AuditError::BudgetExceeded { needed, budget });
    }
    let profile = Profile::of(instance)?;
    if n == 0 {
        return Ok(m == 0);
    }
    let mut owner = vec![0usize; m];
    loop {
        let mut goods: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (g, &a) in owner.iter().enumerate() {
            goods[a].push(g);
        }
        let bundles = goods.iter().map(|g| Bundle::from_indices(g)).collect::<Result<Vec<_>, _>>()?;
        if profile.is_envy_free(&Allocation::new(bundles, m)?)? {
            return Ok(true);
        }
        // next assignment in mixed radix
        let mut k = 0;
        while k < m && owner[k] == n - 1 {
            owner[k] = 0;
            k += 1;
        }
        if k == m {
            return Ok(false);
        }
        owner[k] += 1;
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// The first contiguous EF1 allocation on `line`, with agent `i` holding the
/// `i`-th block, over cut vectors in lexicographic order. Blocks may be empty.
pub fn brute_force_contiguous_ef1(instance: &Instance, line: &Line, budget: u128) -> Result<Option<Allocation>, AuditError> {
    let (n, m) = (instance.n, instance.m);
    if !line.is_permutation_of(m) {
        return Err(ModelError::NotAPermutation { m }.into());
    }
    if n == 0 {
        return Ok(None);
    }
    let needed = binomial((m + n - 1) as u128, (n - 1) as u128).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(AuditError::BudgetExceeded { needed, budget });
    }
    let profile = Profile::of(instance)?;
    let mut cuts = vec![0usize; n - 1];
    loop {
        let mut bundles = Vec::with_capacity(n);
        let mut start = 0;
        for &c in cuts.iter().chain(std::iter::once(&m)) {
            bundles.push(line.block(start..c)?);
            start = c;
        }
        let alloc = Allocation::new(bundles, m)?;
        if profile.is_ef1(&alloc)? {
            return Ok(Some(alloc));
        }
        // next nondecreasing cut vector
        let mut k = cuts.len();
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            if cuts[k] < m {
                let c = cuts[k] + 1;
                for x in &mut cuts[k..] {
                    *x = c;
                }
                break;
            }
        }
    }
}

/// Strict-envy graph: edge `i -> j` when agent `i` prefers `j`'s bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyGraph {
    adj: Vec<Vec<bool>>,
}

impl EnvyGraph {
    /// From `values[i][j] = u_i(A_j)`.
    pub fn from_values(values: &[Vec<Value>]) -> Self {
        let n = values.len();
        let adj = (0..n).map(|i| (0..n).map(|j| i != j && values[i][i] < values[i][j]).collect()).collect();
        EnvyGraph { adj }
    }

    pub fn of(instance: &Instance, alloc: &Allocation) -> Result<Self, AuditError> {
        Ok(EnvyGraph::from_values(&Profile::of(instance)?.value_matrix(alloc)?))
    }

    pub fn agents(&self) -> usize {
        self.adj.len()
    }

    pub fn envies(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.adj.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.adj[i][j]).collect()
    }

    /// Lowest-index agent nobody envies.
    pub fn source(&self) -> Option<usize> {
        let n = self.adj.len();
        (0..n).find(|&j| (0..n).all(|i| !self.adj[i][j]))
    }

    /// A directed cycle as a vertex list `[v0, v1, ..]` with edges `v_k -> v_{k+1}`
    /// and back to `v0`. Depth-first from the lowest index, lowest neighbor first.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.adj.len();
        // 0 unvisited, 1 on stack, 2 done
        let mut state = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut next = vec![0usize; n];
            stack.push(root);
            state[root] = 1;
            while let Some(&v) = stack.last() {
                if let Some(w) = (next[v]..n).find(|&w| self.adj[v][w]) {
                    next[v] = w + 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push(w);
                        }
                        1 => {
                            let at = stack.iter().position(|&x| x == w).expect("on stack");
                            return Some(stack[at..].to_vec());
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(ix: &[usize]) -> Bundle {
        Bundle::from_indices(ix).unwrap()
    }

    fn alloc(bs: &[&[usize]], m: usize) -> Allocation {
        Allocation::new(bs.iter().map(|x| b(x)).collect(), m).unwrap()
    }

    #[test]
    fn envy_freeness_examples() {
        let same = |w: &[u64]| Instance::identical_additive(w, 2).unwrap();
        assert!(is_envy_free(&same(&[1, 1]), &alloc(&[&[0], &[1]], 2)).unwrap());
        assert!(!is_envy_free(&same(&[2, 1]), &alloc(&[&[0], &[1]], 2)).unwrap());
        let inst = Instance::additive(&[vec![3, 1], vec![1, 3]]).unwrap();
        assert!(is_envy_free(&inst, &alloc(&[&[0], &[1]], 2)).unwrap());
    }

    #[test]
    fn ef1_and_efx_examples() {
        let same = |w: &[u64]| Instance::identical_additive(w, 2).unwrap();
        assert!(!is_ef1(&same(&[1, 1]), &alloc(&[&[], &[0, 1]], 2)).unwrap());
        assert!(is_ef1(&same(&[1, 2]), &alloc(&[&[0], &[1]], 2)).unwrap());
        let i311 = same(&[3, 1, 1]);
        assert!(is_ef1(&i311, &alloc(&[&[1], &[0, 2]], 3)).unwrap());
        assert!(!is_efx(&i311, &alloc(&[&[1], &[0, 2]], 3)).unwrap());
        assert!(is_efx(&i311, &alloc(&[&[0], &[1, 2]], 3)).unwrap());
    }

    #[test]
    fn proportionality_examples() {
        let same = |w: &[u64]| Instance::identical_additive(w, 2).unwrap();
        assert!(is_proportional(&same(&[1, 1]), &alloc(&[&[0], &[1]], 2)).unwrap());
        assert!(!is_proportional(&same(&[2, 1]), &alloc(&[&[1], &[0]], 2)).unwrap());
    }

    #[test]
    fn wrong_shape_is_an_error() {
        let inst = Instance::identical_additive(&[1, 1], 2).unwrap();
        let three = Allocation::new(vec![b(&[0]), b(&[1]), Bundle::empty()], 2).unwrap();
        assert!(is_ef1(&inst, &three).is_err());
    }

    #[test]
    fn brute_force_ef() {
        let same = |w: &[u64]| Instance::identical_additive(w, 2).unwrap();
        assert!(brute_force_ef_exists(&same(&[1, 1, 2]), DEFAULT_BUDGET).unwrap());
        assert!(!brute_force_ef_exists(&same(&[1, 1, 1]), DEFAULT_BUDGET).unwrap());
        let mut w = vec![8, 10];
        w.extend([1; 12]);
        assert!(brute_force_ef_exists(&same(&w), DEFAULT_BUDGET).unwrap());
        assert!(matches!(
            brute_force_ef_exists(&same(&[1; 20]), 1000),
            Err(AuditError::BudgetExceeded { needed: 1_048_576, budget: 1000 })
        ));
    }

    #[test]
    fn brute_force_contiguous() {
        let inst = Instance::identical_additive(&[1, 1, 1], 3).unwrap();
        let a = brute_force_contiguous_ef1(&inst, &Line::identity(3), DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(a, alloc(&[&[0], &[1], &[2]], 3));
        let inst = Instance::identical_additive(&[1, 2, 1], 2).unwrap();
        let a = brute_force_contiguous_ef1(&inst, &Line::identity(3), DEFAULT_BUDGET).unwrap().unwrap();
        assert!([1, 2].contains(&a.bundle(0).len()));
    }

    #[test]
    fn envy_graph_examples() {
        let v = |x: u64| Value::from_u64(x);
        let g = EnvyGraph::from_values(&[vec![v(1), v(3)], vec![v(3), v(1)]]);
        assert_eq!(g.edges(), vec![(0, 1), (1, 0)]);
        assert_eq!(g.find_cycle(), Some(vec![0, 1]));
        assert_eq!(g.source(), None);
        let g = EnvyGraph::from_values(&[vec![v(1), v(2)], vec![v(1), v(1)]]);
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(g.source(), Some(0));
        assert_eq!(g.find_cycle(), None);
    }

    #[test]
    fn cycle_rotation_raises_values() {
        let v = |x: u64| Value::from_u64(x);
        let vals = vec![vec![v(1), v(3)], vec![v(3), v(1)]];
        let cycle = EnvyGraph::from_values(&vals).find_cycle().unwrap();
        for (k, &i) in cycle.iter().enumerate() {
            let j = cycle[(k + 1) % cycle.len()];
            assert!(vals[i][j] > vals[i][i]);
        }
    }
}
