//! Explicit query ceilings per protocol.

use crate::machine::ProtocolId;
use crate::search::ceil_log2;

/// Constants in front of `log2 m`, measured on additive instances with
/// `m` up to `2^20` and rounded up with headroom for small `m`.
pub const THREE_ADDITIVE_C: u128 = 24;
pub const THREE_IDENTICAL_C: u128 = 8;
pub const SEPARATE_C: u128 = 12;
/// Constant for the identical monotone protocol.
pub const MONOTONIC_C: u128 = 8;
/// Constant for the batched envy-cycle protocol.
pub const BATCHED_C: u128 = 4;

/// Ceiling on the number of queries `id` issues for `n` agents and `m`
/// goods. `k` is the number of distinct values per valuation and
/// `max_value` the largest value, where the protocol's bound depends on them.
pub fn query_bound(id: ProtocolId, n: usize, m: usize, k: Option<u64>, max_value: Option<u64>) -> Option<u128> {
    let (n, m) = (n as u128, m as u128);
    let log_m = ceil_log2(m) as u128;
    let log1 = log_m.max(1);
    Some(match id {
        ProtocolId::TwoAgentEf1 => 2 * log_m + 4,
        ProtocolId::ThreeIdenticalContiguousEf1 => THREE_IDENTICAL_C * log1,
        ProtocolId::SeparateDesignatedGoods => SEPARATE_C * log1,
        ProtocolId::ThreeAdditiveEf1 => THREE_ADDITIVE_C * log1,
        ProtocolId::EnvyCycleElimination => n * m + n,
        ProtocolId::EnvyCycleBatched => BATCHED_C * n * n * n * k? as u128 * log1,
        ProtocolId::SizeDominantN2 => n * n,
        ProtocolId::ContiguousIdenticalMonotonic => {
            let log_k = (ceil_log2(max_value? as u128 + 2) as u128).max(1);
            MONOTONIC_C * n * log1 * (n * log1 + log_k)
        }
        ProtocolId::FullElicitation => n * m,
    })
}
