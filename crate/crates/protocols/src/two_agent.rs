use fairq_core::{Allocation, Line, QueryError};

use crate::probe::Probe;
use crate::search::rightmost_true;

/// Cut-and-choose on a line for two agents with monotonic valuations.
///
/// Agent 0 cuts at the rightmost good `g` with `u0(L_g) <= u0(R_g + g)`;
/// agent 1 takes the bundle she weakly prefers, the left one on ties.
pub fn two_agent_ef1(p: &mut Probe, line: &Line) -> Result<Allocation, QueryError> {
    let m = line.len();
    if m == 0 {
        return Ok(Allocation::new(vec![Default::default(), Default::default()], 0)?);
    }
    // position 0 always qualifies: u0(empty) = 0
    let g = rightmost_true(1..m, |pos| {
        let left = p.value(0, &line.prefix(pos)?)?;
        let right = p.value(0, &line.suffix(pos)?)?;
        Ok::<_, QueryError>(left <= right)
    })?
    .unwrap_or(0);
    let left = p.value(0, &line.prefix(g)?)?;
    let rest = p.value(0, &line.suffix(g + 1)?)?;
    let cut = if left <= rest { g + 1 } else { g };
    let (x, y) = (line.prefix(cut)?, line.suffix(cut)?);
    let bundles = if p.value(1, &x)? >= p.value(1, &y)? { vec![y, x] } else { vec![x, y] };
    Ok(Allocation::with_agents(bundles, 2, p.goods())?)
}
