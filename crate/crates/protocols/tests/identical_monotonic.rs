mod common;

use common::*;
use fairq_core::audit::{brute_force_contiguous_ef1, Profile};
use fairq_core::{build_panel, Allocation, Instance, Line, ValuationSpec, Weights};
use fairq_protocols::bounds::MONOTONIC_C;
use fairq_protocols::{contiguous_identical_monotonic, LevelPartition, Probe};
use proptest::prelude::*;

/// Block values straight from the valuation, `u[l][r]` for goods `l..r`.
fn block_values(inst: &Instance, line: &Line) -> Vec<Vec<u64>> {
    let v = &inst.compile().unwrap()[0];
    let m = line.len();
    let mut u = vec![vec![0u64; m + 1]; m + 1];
    for l in 0..=m {
        for r in l..=m {
            u[l][r] = v.value(&line.block(l..r).unwrap()).unwrap().to_u64().unwrap();
        }
    }
    u
}

fn meets(u: &[Vec<u64>], l: usize, r: usize, x: u64) -> bool {
    let w = if r - l <= 1 { 0 } else { u[l + 1][r].min(u[l][r - 1]) };
    w <= x && x <= u[l][r]
}

/// Whether the line splits into `n` blocks that all meet `x`.
fn dp_feasible(u: &[Vec<u64>], n: usize, x: u64) -> bool {
    let m = u.len() - 1;
    let mut reach = vec![false; m + 1];
    reach[0] = true;
    for _ in 0..n {
        let mut next = vec![false; m + 1];
        for s in (0..=m).filter(|&s| reach[s]) {
            for e in s..=m {
                next[e] |= meets(u, s, e, x);
            }
        }
        reach = next;
    }
    reach[m]
}

fn check(inst: &Instance, n: usize, k_max: u64) -> Result<(LevelPartition, usize), TestCaseError> {
    let m = inst.m;
    let line = Line::identity(m);
    let mut panel = build_panel(inst).unwrap();
    let lp = contiguous_identical_monotonic(&mut Probe::new(&mut panel), 0, n, k_max, &line).unwrap();
    let u = block_values(inst, &line);
    prop_assert!((0..=k_max).any(|x| dp_feasible(&u, n, x)));
    prop_assert!(dp_feasible(&u, n, lp.level));
    let mut s = 0;
    for r in &lp.spans {
        prop_assert_eq!(r.start, s);
        prop_assert!(meets(&u, r.start, r.end, lp.level));
        s = r.end;
    }
    prop_assert_eq!(s, m);
    let a = Allocation::new(lp.bundles.clone(), m).unwrap();
    prop_assert!(Profile::of(inst).unwrap().is_ef1_endpoint(&a, &line).unwrap());
    let log_m = ceil_log2(m).max(1) as u128;
    let log_k = ceil_log2(k_max as usize + 2).max(1) as u128;
    let bound = MONOTONIC_C * n as u128 * log_m * (n as u128 * log_m + log_k);
    prop_assert!((panel.total_queries() as u128) <= bound, "{} > {}", panel.total_queries(), bound);
    Ok((lp, panel.total_queries()))
}

#[test]
fn agrees_with_brute_force_on_unit_goods() {
    let inst = Instance::identical_additive(&[1; 6], 3).unwrap();
    let bf = brute_force_contiguous_ef1(&inst, &Line::identity(6), 1 << 20).unwrap().unwrap();
    let mut panel = build_panel(&inst).unwrap();
    let lp = contiguous_identical_monotonic(&mut Probe::new(&mut panel), 0, 3, 6, &Line::identity(6)).unwrap();
    assert_eq!(lp.bundles, bf.bundles());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn monotone_tables(seed in any::<u64>(), n in 1usize..5, m in 0usize..7) {
        let mut r = rng(seed);
        let spec = monotone_table(&mut r, m, 4);
        let inst = identical(spec, m, n);
        let top = inst.compile().unwrap()[0].value(&fairq_core::Bundle::all(m)).unwrap().to_u64().unwrap();
        check(&inst, n, top)?;
    }

    #[test]
    fn additive_integers(seed in any::<u64>(), n in 1usize..6, m in 0usize..40, max in 0u64..30) {
        let w = weights(&mut rng(seed), m, max);
        let total: u64 = w.iter().sum();
        let inst = identical(ValuationSpec::Additive { weights: Weights::Integers(w) }, m, n);
        check(&inst, n, total + seed % 50)?;
    }

    #[test]
    fn quantized(seed in any::<u64>(), n in 1usize..5, m in 1usize..40, k in 1u32..8) {
        let w = weights(&mut rng(seed), m, 20);
        let inst = identical(kvalued(k, w), m, n);
        check(&inst, n, k as u64 - 1)?;
    }
}
