#![allow(dead_code)]

use fairq_core::audit::Profile;
use fairq_core::{Allocation, Instance, TableEntry, Value, ValuationSpec, Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weights(r: &mut ChaCha8Rng, m: usize, max: u64) -> Vec<u64> {
    (0..m).map(|_| r.random_range(0..=max)).collect()
}

pub fn additive(r: &mut ChaCha8Rng, n: usize, m: usize, max: u64) -> Instance {
    let rows: Vec<Vec<u64>> = (0..n).map(|_| weights(r, m, max)).collect();
    Instance::additive(&rows).unwrap()
}

/// Full table with `v(S) = max over g of v(S - g) + step`, so monotone and
/// typically far from additive.
pub fn monotone_table(r: &mut ChaCha8Rng, m: usize, max_step: u64) -> ValuationSpec {
    let mut v = vec![0u64; 1 << m];
    let mut masks: Vec<usize> = (1..1usize << m).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let base = (0..m).filter(|g| s >> g & 1 == 1).map(|g| v[s ^ (1 << g)]).max().unwrap();
        v[s] = base + r.random_range(0..=max_step);
    }
    let entries = (0..1usize << m)
        .map(|s| TableEntry { subset: (0..m).filter(|g| s >> g & 1 == 1).collect(), value: Value::from_u64(v[s]) })
        .collect();
    ValuationSpec::Table { entries }
}

pub fn monotone(r: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
    let specs = (0..n).map(|_| monotone_table(r, m, 3)).collect();
    Instance::from_specs(m, specs).unwrap()
}

pub fn identical(spec: ValuationSpec, m: usize, n: usize) -> Instance {
    Instance::from_specs(m, vec![spec; n]).unwrap()
}

pub fn kvalued(k: u32, w: Vec<u64>) -> ValuationSpec {
    ValuationSpec::KValued { k, inner: Box::new(ValuationSpec::Additive { weights: Weights::Integers(w) }) }
}

pub fn ef1(inst: &Instance, a: &Allocation) -> bool {
    Profile::of(inst).unwrap().is_ef1(a).unwrap()
}

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 { 0 } else { usize::BITS - (x - 1).leading_zeros() }
}
