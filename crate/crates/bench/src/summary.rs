//! Per-protocol summaries of run records.

use std::collections::BTreeMap;

use fairq_protocols::ProtocolId;
use serde::{Deserialize, Serialize};

use crate::RunRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: ProtocolId,
    pub runs: usize,
    pub max_queries: u64,
    pub max_bound_ratio: f64,
    /// Least-squares slope of the per-`m` maximum query count against `log2 m`.
    pub slope_log_m: f64,
    /// Same, against `m`.
    pub slope_m: f64,
    /// Largest increase in the maximum query count between consecutive `m`
    /// in the schedule.
    pub max_step_increase: i64,
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn summarize(records: &[RunRecord]) -> Vec<ProtocolSummary> {
    let mut by_protocol: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_protocol.entry(r.protocol.as_str()).or_default().push(r);
    }
    by_protocol
        .into_values()
        .map(|rs| {
            let mut per_m: BTreeMap<usize, u64> = BTreeMap::new();
            for r in &rs {
                let e = per_m.entry(r.m).or_insert(0);
                *e = (*e).max(r.queries);
            }
            let log_pts: Vec<(f64, f64)> = per_m.iter().map(|(&m, &q)| ((m.max(1) as f64).log2(), q as f64)).collect();
            let lin_pts: Vec<(f64, f64)> = per_m.iter().map(|(&m, &q)| (m as f64, q as f64)).collect();
            let maxes: Vec<u64> = per_m.values().copied().collect();
            ProtocolSummary {
                protocol: rs[0].protocol,
                runs: rs.len(),
                max_queries: rs.iter().map(|r| r.queries).max().unwrap_or(0),
                max_bound_ratio: rs.iter().map(|r| r.bound_ratio()).fold(0.0, f64::max),
                slope_log_m: slope(&log_pts),
                slope_m: slope(&lin_pts),
                max_step_increase: maxes.windows(2).map(|w| w[1] as i64 - w[0] as i64).max().unwrap_or(0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        assert!((slope(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]) - 2.0).abs() < 1e-12);
        assert_eq!(slope(&[(1.0, 3.0)]), 0.0);
    }
}
