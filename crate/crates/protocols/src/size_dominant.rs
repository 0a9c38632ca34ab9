use fairq_core::{Allocation, Bundle, Line, QueryError};

use crate::probe::Probe;

/// For valuations where more goods are always weakly better.
///
/// The line is cut into `n` blocks of `m / n` goods plus `m % n` leftovers.
/// The first `n - r` agents pick blocks in turn; each remaining agent gets a
/// block and one leftover.
pub fn size_dominant_n2(p: &mut Probe, line: &Line) -> Result<Allocation, QueryError> {
    let n = p.agents();
    let m = line.len();
    let q = m / n;
    let r = m % n;
    let mut free: Vec<Bundle> = (0..n).map(|t| line.block(t * q..(t + 1) * q)).collect::<Result<_, _>>()?;
    let mut bundles = Vec::with_capacity(n);
    for agent in 0..n - r {
        let mut best = 0;
        if free.len() > 1 {
            let mut best_v = p.value(agent, &free[0])?;
            for (k, b) in free.iter().enumerate().skip(1) {
                let v = p.value(agent, b)?;
                if v > best_v {
                    best = k;
                    best_v = v;
                }
            }
        }
        bundles.push(free.remove(best));
    }
    for (k, b) in free.into_iter().enumerate() {
        bundles.push(b.with(line.good_at(n * q + k)?));
    }
    Ok(Allocation::with_agents(bundles, n, p.goods())?)
}
