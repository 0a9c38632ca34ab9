use fairq_core::{Allocation, Bundle, GoodId, QueryError, Value};

use crate::probe::Probe;

/// Asks every agent for every single good, then runs round-robin picking.
/// EF1 for additive valuations; costs exactly `n * m` queries.
pub fn full_elicitation(p: &mut Probe) -> Result<Allocation, QueryError> {
    let (n, m) = (p.agents(), p.goods());
    let mut vals: Vec<Vec<Value>> = Vec::with_capacity(n);
    for i in 0..n {
        let row = (0..m).map(|g| p.value(i, &Bundle::singleton(GoodId::new(g)))).collect::<Result<_, _>>()?;
        vals.push(row);
    }
    let mut left: Vec<usize> = (0..m).collect();
    let mut bundles = vec![Vec::new(); n];
    let mut turn = 0;
    while !left.is_empty() {
        let row = &vals[turn];
        let k = (0..left.len()).fold(0, |best, k| if row[left[k]] > row[left[best]] { k } else { best });
        bundles[turn].push(GoodId::new(left.remove(k)));
        turn = (turn + 1) % n;
    }
    let bundles = bundles.into_iter().map(Bundle::from_goods).collect::<Result<_, _>>()?;
    Ok(Allocation::with_agents(bundles, n, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairq_core::{build_panel, Instance};

    #[test]
    fn round_robin_picks() {
        let inst = Instance::additive(&[vec![1, 5, 3], vec![4, 1, 2]]).unwrap();
        let mut panel = build_panel(&inst).unwrap();
        let a = full_elicitation(&mut Probe::new(&mut panel)).unwrap();
        assert_eq!(a.bundle(0), &Bundle::from_indices(&[1, 2]).unwrap());
        assert_eq!(a.bundle(1), &Bundle::from_indices(&[0]).unwrap());
        assert_eq!(panel.total_queries(), 6);
    }
}
