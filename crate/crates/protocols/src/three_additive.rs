//! Three agents with arbitrary additive valuations, after Selfridge-Conway.
//!
//! Agent 0 cuts three near-equal blocks; agent 1 trims her favorite; large
//! goods of the trimming are tracked so that agent 1 keeps EF1 after agent 2
//! chooses first.

use fairq_core::{Allocation, Bundle, GoodId, Line, QueryError, Value};
use serde::{Deserialize, Serialize};

use crate::contiguous::{separate_designated_goods, three_identical_contiguous_ef1, three_identical_spans};
use crate::probe::Probe;
use crate::search::leftmost_true;

/// State of the trimming step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeGoodLedger {
    pub a_prime: Bundle,
    pub t: Bundle,
    pub d: Value,
    pub large: Vec<GoodId>,
}

fn favorite(p: &mut Probe, agent: usize, bundles: &[&Bundle]) -> Result<usize, QueryError> {
    let mut best = 0;
    let mut best_v = p.value(agent, bundles[0])?;
    for (i, b) in bundles.iter().enumerate().skip(1) {
        let v = p.value(agent, b)?;
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    Ok(best)
}

fn favorites(vals: &[Value]) -> Vec<usize> {
    let max = vals.iter().max().expect("nonempty");
    (0..vals.len()).filter(|&i| vals[i] == *max).collect()
}

pub fn three_additive_ef1(p: &mut Probe, line: &Line) -> Result<Allocation, QueryError> {
    let (alloc, _) = three_additive_traced(p, line)?;
    Ok(alloc)
}

/// Also returns the trimming ledger when the run reached that step.
pub fn three_additive_traced(p: &mut Probe, line: &Line) -> Result<(Allocation, Option<LargeGoodLedger>), QueryError> {
    let m = p.goods();
    let finish = |b: [Bundle; 3]| Allocation::with_agents(b.to_vec(), 3, m);

    // Step 1
    let spans = three_identical_spans(p, 0, line)?;
    let parts: Vec<Bundle> = spans.iter().map(|s| line.block(s.clone())).collect::<Result<_, _>>()?;
    let mut v2 = Vec::with_capacity(3);
    let mut v3 = Vec::with_capacity(3);
    for b in &parts {
        v2.push(p.value(1, b)?);
        v3.push(p.value(2, b)?);
    }
    let (f2, f3) = (favorites(&v2), favorites(&v3));
    let distinct = f2.iter().flat_map(|&i| f3.iter().map(move |&j| (i, j))).find(|&(i, j)| i != j);
    if let Some((i, j)) = distinct {
        let k = 3 - i - j;
        return Ok((finish([parts[k].clone(), parts[i].clone(), parts[j].clone()])?, None));
    }
    // both strictly prefer the same block
    let ai = f2[0];
    let others: Vec<usize> = (0..3).filter(|&k| k != ai).collect();
    let (bi, ci) = if v2[others[1]] > v2[others[0]] { (others[1], others[0]) } else { (others[0], others[1]) };
    let (b, c) = (parts[bi].clone(), parts[ci].clone());
    let u2_b = v2[bi].clone();
    let u3_max = v3[bi].clone().max(v3[ci].clone());

    // Step 2
    let a_line = line.slice(spans[ai].clone())?;
    let la = a_line.len();
    let h = leftmost_true(0..la - 1, |q| Ok::<_, QueryError>(p.value(1, &a_line.prefix(q + 1)?)? > u2_b))?.unwrap_or(la - 1);
    let mut a_prime = a_line.prefix(h)?;
    let mut t_line = a_line.slice(h..la)?;
    let mut large = vec![a_line.good_at(h)?];
    let mut d = u2_b
        .checked_sub(&p.value(1, &a_prime)?)
        .ok_or_else(|| QueryError::Contract("trimmed block worth more than the second favorite".into()))?;
    if p.value(2, &a_prime)? >= u3_max {
        return Ok((step2_allocation(p, &t_line, a_prime, b, c, m)?, None));
    }

    // Step 3
    while large.len() < 3 {
        let nl = t_line.without(&Bundle::from_goods(large.iter().copied())?);
        let next = if nl.is_empty() {
            None
        } else if d.is_zero() {
            // every remaining good is large; take the next one and move nothing
            Some(0)
        } else if p.value(1, &nl.goods())? < d {
            None
        } else {
            let last = nl.len() - 1;
            Some(leftmost_true(0..last, |q| Ok::<_, QueryError>(p.value(1, &nl.prefix(q + 1)?)? >= d))?.unwrap_or(last))
        };
        let moved = match next {
            Some(e) => {
                large.push(nl.good_at(e)?);
                nl.prefix(e)?
            }
            None => nl.goods(),
        };
        let mv = p.value(1, &moved)?;
        d = d.checked_sub(&mv).ok_or_else(|| QueryError::Contract("deficit went negative".into()))?;
        if !moved.is_empty() {
            a_prime = a_prime.union(&moved);
            t_line = t_line.without(&moved);
            if p.value(2, &a_prime)? >= u3_max {
                return Ok((step2_allocation(p, &t_line, a_prime, b, c, m)?, None));
            }
        }
        if next.is_none() {
            break;
        }
    }
    let ledger = LargeGoodLedger { a_prime: a_prime.clone(), t: t_line.goods(), d: d.clone(), large: large.clone() };

    // Step 4
    let ts: [Bundle; 3] = if large.len() == 3 {
        separate_designated_goods(p, 2, &t_line, [large[0], large[1], large[2]])?
    } else {
        if t_line.len() != large.len() {
            return Err(QueryError::Contract("leftover holds goods besides the large ones".into()));
        }
        let mut ts = [Bundle::empty(), Bundle::empty(), Bundle::empty()];
        for (k, &g) in large.iter().enumerate() {
            ts[k] = Bundle::singleton(g);
        }
        ts
    };

    // Step 5
    let (s3, s1) = if p.value(2, &c)? > p.value(2, &b)? { (c, b) } else { (b, c) };
    let s2 = a_prime;

    // Step 6
    let (t1, t2, t3) = if large.len() == 3 {
        let mut trimmed = Vec::with_capacity(3);
        for t in &ts {
            let g = *large.iter().find(|&&g| t.contains(g)).expect("separated");
            trimmed.push(t.without(g));
        }
        let i2 = favorite(p, 1, &trimmed.iter().collect::<Vec<_>>())?;
        let rest: Vec<usize> = (0..3).filter(|&k| k != i2).collect();
        let pick = favorite(p, 0, &[&ts[rest[0]], &ts[rest[1]]])?;
        let (i1, i3) = (rest[pick], rest[1 - pick]);
        (ts[i1].clone(), ts[i2].clone(), ts[i3].clone())
    } else {
        let [first, second, _] = ts;
        (second, first, Bundle::empty())
    };
    Ok((finish([s1.union(&t1), s2.union(&t2), s3.union(&t3)])?, Some(ledger)))
}

fn step2_allocation(p: &mut Probe, t_line: &Line, a_prime: Bundle, b: Bundle, c: Bundle, m: usize) -> Result<Allocation, QueryError> {
    let ts = three_identical_contiguous_ef1(p, 1, t_line)?;
    let i3 = favorite(p, 2, &[&ts[0], &ts[1], &ts[2]])?;
    let rest: Vec<usize> = (0..3).filter(|&k| k != i3).collect();
    let pick = favorite(p, 0, &[&ts[rest[0]], &ts[rest[1]]])?;
    let (i1, i2) = (rest[pick], rest[1 - pick]);
    Ok(Allocation::with_agents(vec![c.union(&ts[i1]), b.union(&ts[i2]), a_prime.union(&ts[i3])], 3, m)?)
}
