//! Binary search over monotone predicates on positions.
//!
//! Both searches evaluate the predicate at most `ceil(log2(len + 1))` times
//! and report `None` when the predicate holds nowhere in the range. Callers
//! that already know an endpoint's answer should leave it out of the range.

use std::ops::Range;

/// Smallest `p` in `range` with `pred(p)`, for a predicate that is false then true.
pub fn leftmost_true<E>(range: Range<usize>, mut pred: impl FnMut(usize) -> Result<bool, E>) -> Result<Option<usize>, E> {
    let (mut lo, mut hi) = (range.start, range.end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok((lo < range.end).then_some(lo))
}

/// Largest `p` in `range` with `pred(p)`, for a predicate that is true then false.
pub fn rightmost_true<E>(range: Range<usize>, mut pred: impl FnMut(usize) -> Result<bool, E>) -> Result<Option<usize>, E> {
    let (start, end) = (range.start, range.end);
    let found = leftmost_true(0..end.saturating_sub(start), |k| pred(end - 1 - k))?;
    Ok(found.map(|k| end - 1 - k))
}

/// Evaluates `pred` on every position and reports where a false-then-true
/// shape breaks. For tests and debugging; costs `len` evaluations.
pub fn check_monotone<E>(range: Range<usize>, mut pred: impl FnMut(usize) -> Result<bool, E>) -> Result<Result<(), usize>, E> {
    let mut seen_true = false;
    for p in range {
        let t = pred(p)?;
        if seen_true && !t {
            return Ok(Err(p));
        }
        seen_true |= t;
    }
    Ok(Ok(()))
}

/// `ceil(log2(x))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}
