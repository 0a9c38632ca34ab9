//! Contiguous splits for identical additive valuations: the balanced
//! two-block cut, the three-block EF1 split, and the variant that keeps
//! three designated goods apart.

use std::ops::Range;

use fairq_core::{AgentId, Bundle, GoodId, Line, QueryError, Value};
use serde::{Deserialize, Serialize};

use crate::probe::Probe;
use crate::search::{leftmost_true, rightmost_true};

/// Two contiguous blocks of a line, `left = line[..cut]`, `right = line[cut..]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub left: Bundle,
    pub right: Bundle,
    pub cut: usize,
}

/// The cut minimizing `|u(left) - u(right)|`.
///
/// Ties prefer a cut leaving both blocks nonempty, then the lower position.
/// Zero-value goods beside the cut end up in the lower-value block.
pub fn balanced_contiguous_split(p: &mut Probe, agent: AgentId, line: &Line) -> Result<SplitResult, QueryError> {
    let m = line.len();
    if m == 0 {
        return Ok(SplitResult { left: Bundle::empty(), right: Bundle::empty(), cut: 0 });
    }
    let total = p.value(agent, &line.goods())?;
    // leftmost g with 2 u(L_g + g) >= u(G); the last position always qualifies
    let g = leftmost_true(0..m - 1, |pos| Ok::<_, QueryError>(p.value(agent, &line.prefix(pos + 1)?)?.scale(2) >= total))?
        .unwrap_or(m - 1);
    let gap = |v: Value| v.scale(2).abs_diff(&total);
    let d_lo = gap(p.value(agent, &line.prefix(g)?)?);
    let d_hi = gap(p.value(agent, &line.prefix(g + 1)?)?);
    let inner = |c: usize| c > 0 && c < m;
    let cut = if d_lo < d_hi || (d_lo == d_hi && (inner(g) || !inner(g + 1))) { g } else { g + 1 };
    Ok(SplitResult { left: line.prefix(cut)?, right: line.suffix(cut)?, cut })
}

/// Three contiguous blocks of `line` (left, middle, right) forming an EF1
/// allocation for identical additive agents.
pub fn three_identical_contiguous_ef1(p: &mut Probe, agent: AgentId, line: &Line) -> Result<[Bundle; 3], QueryError> {
    let spans = three_identical_spans(p, agent, line)?;
    Ok([line.block(spans[0].clone())?, line.block(spans[1].clone())?, line.block(spans[2].clone())?])
}

/// Position ranges of the three blocks.
pub fn three_identical_spans(p: &mut Probe, agent: AgentId, line: &Line) -> Result<[Range<usize>; 3], QueryError> {
    three_spans(p, agent, line, true)
}

fn three_spans(p: &mut Probe, agent: AgentId, line: &Line, may_mirror: bool) -> Result<[Range<usize>; 3], QueryError> {
    let m = line.len();
    if m == 0 {
        return Ok([0..0, 0..0, 0..0]);
    }
    let total = p.value(agent, &line.goods())?;
    if total.is_zero() {
        return Ok([0..0, 0..m, m..m]);
    }
    let g1 = leftmost_true(0..m - 1, |pos| Ok::<_, QueryError>(p.value(agent, &line.prefix(pos + 1)?)?.scale(3) > total))?
        .unwrap_or(m - 1);
    let g2 = rightmost_true(1..m, |pos| Ok::<_, QueryError>(p.value(agent, &line.suffix(pos)?)?.scale(3) > total))?
        .unwrap_or(0);
    let left = p.value(agent, &line.prefix(g1)?)?;
    let right = p.value(agent, &line.suffix(g2 + 1)?)?;
    if left < right && may_mirror {
        let [a, b, c] = three_spans(p, agent, &line.reversed(), false)?;
        let flip = |r: Range<usize>| m - r.end..m - r.start;
        return Ok([flip(c), flip(b), flip(a)]);
    }
    let a_end = if g1 > 0 {
        leftmost_true(0..g1 - 1, |pos| Ok::<_, QueryError>(p.value(agent, &line.prefix(pos + 1)?)? >= right))?.unwrap_or(g1 - 1) + 1
    } else {
        0
    };
    let c_value = right;
    if c_value >= p.value(agent, &line.block(a_end..g2)?)? {
        return Ok([0..a_end, a_end..g2 + 1, g2 + 1..m]);
    }
    let split = balanced_contiguous_split(p, agent, &line.slice(0..g2)?)?;
    Ok([0..split.cut, split.cut..g2, g2..m])
}

fn contract(msg: impl Into<String>) -> QueryError {
    QueryError::Contract(msg.into())
}

/// An EF1 split of the goods on `line` for identical additive agents with
/// the three `designated` goods in three different bundles.
pub fn separate_designated_goods(
    p: &mut Probe,
    agent: AgentId,
    line: &Line,
    designated: [GoodId; 3],
) -> Result<[Bundle; 3], QueryError> {
    let m = line.len();
    if m < 3 {
        return Err(contract(format!("need at least 3 goods to separate, got {m}")));
    }
    let d_set = Bundle::from_goods(designated).map_err(|e| contract(e.to_string()))?;
    if !d_set.is_subset(&line.goods()) {
        return Err(contract("designated goods must lie on the line"));
    }
    let total = p.value(agent, &line.goods())?;
    let mut ds: Vec<(GoodId, Value)> = Vec::with_capacity(3);
    for g in designated {
        ds.push((g, p.value(agent, &Bundle::singleton(g))?));
    }
    ds.sort_by(|a, b| b.1.cmp(&a.1));
    let (g1, g2, g3) = (ds[0].0, ds[1].0, ds[2].0);
    let rest = line.without(&d_set);
    let ends = |p: &mut Probe, left: GoodId, mid: &Line, right: GoodId| -> Result<SplitResult, QueryError> {
        let l = Line::concat([&Line::singleton(left), mid, &Line::singleton(right)])?;
        balanced_contiguous_split(p, agent, &l)
    };

    let out = if ds[0].1.scale(3) >= total {
        let s = ends(p, g2, &rest, g3)?;
        [Bundle::singleton(g1), s.left, s.right]
    } else if let Some(g) = big_undesignated(p, agent, line, &d_set, &total)? {
        let s = ends(p, g1, &rest.without(&Bundle::singleton(g)), g2)?;
        [Bundle::from_goods([g3, g]).expect("distinct"), s.left, s.right]
    } else {
        let l0 = Line::concat([&Line::singleton(g1), &rest, &Line::singleton(g2)])?;
        let n0 = l0.len();
        let pos = leftmost_true(1..n0 - 1, |q| Ok::<_, QueryError>(p.value(agent, &l0.prefix(q + 1)?)?.scale(3) > total))?
            .unwrap_or(n0 - 1);
        let g = l0.good_at(pos)?;
        let through_g3 = l0.prefix(pos + 1)?.with(g3);
        if p.value(agent, &through_g3)?.scale(3) <= total.scale(2) {
            let l3 = Line::concat([&l0.slice(0..pos + 1)?, &Line::singleton(g3), &l0.slice(pos + 1..n0)?])?;
            three_identical_contiguous_ef1(p, agent, &l3)?
        } else {
            let s = ends(p, g1, &rest.without(&Bundle::singleton(g)), g2)?;
            [Bundle::from_goods([g3, g]).expect("distinct"), s.left, s.right]
        }
    };
    for d in designated {
        if out.iter().filter(|b| b.contains(d)).count() != 1 {
            return Err(contract(format!("designated good {d} was not separated")));
        }
    }
    if out.iter().filter(|b| !b.is_disjoint(&d_set)).count() != 3 {
        return Err(contract("designated goods share a bundle"));
    }
    Ok(out)
}

/// A non-designated good worth at least a third, if any. Only the first
/// good whose prefix passes a third and the last whose suffix does can be one.
fn big_undesignated(p: &mut Probe, agent: AgentId, line: &Line, designated: &Bundle, total: &Value) -> Result<Option<GoodId>, QueryError> {
    let m = line.len();
    let gl = leftmost_true(0..m - 1, |pos| Ok::<_, QueryError>(p.value(agent, &line.prefix(pos + 1)?)?.scale(3) > *total))?
        .unwrap_or(m - 1);
    let gr = rightmost_true(1..m, |pos| Ok::<_, QueryError>(p.value(agent, &line.suffix(pos)?)?.scale(3) > *total))?
        .unwrap_or(0);
    for pos in [gl, gr] {
        let g = line.good_at(pos)?;
        if !designated.contains(g) && p.value(agent, &Bundle::singleton(g))?.scale(3) >= *total {
            return Ok(Some(g));
        }
    }
    Ok(None)
}
