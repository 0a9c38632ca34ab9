//! Goods arranged on a line.
//!
//! A [`Line`] orders some set of goods (usually all of them). It is stored as
//! a sequence of segments, each a run of consecutive indices walked up or
//! down, so the identity line, its reverse, and the few-segment lines built by
//! moving a handful of goods to the ends all stay small no matter how many
//! goods there are.

use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bundle::Bundle;
use crate::error::ModelError;
use crate::GoodId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Segment {
    first: u32,
    len: u32,
    descending: bool,
}

impl Segment {
    fn at(&self, offset: u32) -> u32 {
        if self.descending {
            self.first - offset
        } else {
            self.first + offset
        }
    }

    /// Index range covered by offsets `lo..hi` of this segment.
    fn index_range(&self, lo: u32, hi: u32) -> Range<usize> {
        if self.descending {
            (self.first + 1 - hi) as usize..(self.first + 1 - lo) as usize
        } else {
            (self.first + lo) as usize..(self.first + hi) as usize
        }
    }

    fn sub(&self, lo: u32, hi: u32) -> Segment {
        Segment { first: self.at(lo), len: hi - lo, descending: self.descending }
    }

    fn reversed(&self) -> Segment {
        Segment { first: self.at(self.len - 1), len: self.len, descending: !self.descending }
    }
}

/// An ordering of a set of goods. Positions run `0..len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Line {
    segs: Vec<Segment>,
    /// `offsets[k]` is the position of the first good of segment `k`.
    offsets: Vec<usize>,
    len: usize,
}

impl Line {
    pub fn identity(m: usize) -> Self {
        let mut line = Line::default();
        line.push_range(0, m as u32, false);
        line
    }

    pub fn empty() -> Self {
        Line::default()
    }

    /// A line visiting `order` left to right. Goods must be distinct.
    pub fn from_order(order: &[GoodId]) -> Result<Self, ModelError> {
        Bundle::from_goods(order.iter().copied())?;
        let mut line = Line::default();
        for &g in order {
            line.push_good(g);
        }
        Ok(line)
    }

    /// Like [`Line::from_order`], additionally requiring a permutation of `0..m`.
    pub fn permutation(order: &[usize], m: usize) -> Result<Self, ModelError> {
        if order.len() != m {
            return Err(ModelError::NotAPermutation { m });
        }
        let goods: Vec<GoodId> = order.iter().map(|&i| GoodId::new(i)).collect();
        let line = Line::from_order(&goods)?;
        if line.goods().check_range(m).is_err() {
            return Err(ModelError::NotAPermutation { m });
        }
        Ok(line)
    }

    /// Goods of `bundle` in increasing index order.
    pub fn of_bundle(bundle: &Bundle) -> Self {
        let mut line = Line::default();
        for r in bundle.runs() {
            line.push_range(r.start as u32, r.end as u32, false);
        }
        line
    }

    pub fn singleton(g: GoodId) -> Self {
        let mut line = Line::default();
        line.push_good(g);
        line
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn segment_count(&self) -> usize {
        self.segs.len()
    }

    /// True when the line visits exactly the goods `0..m`.
    pub fn is_permutation_of(&self, m: usize) -> bool {
        self.len == m && self.goods() == Bundle::all(m)
    }

    fn push_segment(&mut self, seg: Segment) {
        if seg.len == 0 {
            return;
        }
        if let Some(last) = self.segs.last_mut() {
            let end = last.at(last.len - 1);
            let up = end.checked_add(1) == Some(seg.first)
                && (seg.len == 1 || !seg.descending)
                && (last.len == 1 || !last.descending);
            let down = end.checked_sub(1) == Some(seg.first)
                && (seg.len == 1 || seg.descending)
                && (last.len == 1 || last.descending);
            if up || down {
                last.descending = down;
                last.len += seg.len;
                self.len += seg.len as usize;
                return;
            }
        }
        self.offsets.push(self.len);
        self.len += seg.len as usize;
        self.segs.push(seg);
    }

    fn push_range(&mut self, start: u32, end: u32, descending: bool) {
        if end <= start {
            return;
        }
        let seg = if descending {
            Segment { first: end - 1, len: end - start, descending: true }
        } else {
            Segment { first: start, len: end - start, descending: false }
        };
        self.push_segment(seg);
    }

    fn push_good(&mut self, g: GoodId) {
        self.push_segment(Segment { first: g.raw(), len: 1, descending: false });
    }

    fn locate(&self, position: usize) -> (usize, u32) {
        let k = match self.offsets.binary_search(&position) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        (k, (position - self.offsets[k]) as u32)
    }

    /// The good at `position`.
    pub fn good_at(&self, position: usize) -> Result<GoodId, ModelError> {
        if position >= self.len {
            return Err(ModelError::PositionOutOfRange { position, len: self.len });
        }
        let (k, off) = self.locate(position);
        Ok(GoodId::from_raw(self.segs[k].at(off)))
    }

    /// Position of `g` on this line, if the line visits it.
    pub fn position_of(&self, g: GoodId) -> Option<usize> {
        let i = g.raw();
        self.segs.iter().zip(&self.offsets).find_map(|(s, &off)| {
            let (lo, hi) = if s.descending { (s.first + 1 - s.len, s.first) } else { (s.first, s.first + s.len - 1) };
            if i < lo || i > hi {
                return None;
            }
            let d = if s.descending { s.first - i } else { i - s.first };
            Some(off + d as usize)
        })
    }

    /// Goods at positions `range` as a bundle.
    pub fn block(&self, range: Range<usize>) -> Result<Bundle, ModelError> {
        if range.end > self.len || range.start > range.end {
            return Err(ModelError::PositionOutOfRange { position: range.end.max(range.start), len: self.len });
        }
        Ok(Bundle::from_ranges(self.seg_pieces(range).map(|(s, lo, hi)| s.index_range(lo, hi))))
    }

    /// The first `position` goods.
    pub fn prefix(&self, position: usize) -> Result<Bundle, ModelError> {
        if position > self.len {
            return Err(ModelError::PositionOutOfRange { position, len: self.len });
        }
        self.block(0..position)
    }

    /// The goods after the first `position`.
    pub fn suffix(&self, position: usize) -> Result<Bundle, ModelError> {
        if position > self.len {
            return Err(ModelError::PositionOutOfRange { position, len: self.len });
        }
        self.block(position..self.len)
    }

    /// All goods on the line.
    pub fn goods(&self) -> Bundle {
        Bundle::from_ranges(self.segs.iter().map(|s| s.index_range(0, s.len)))
    }

    fn seg_pieces(&self, range: Range<usize>) -> impl Iterator<Item = (Segment, u32, u32)> + '_ {
        let start_k = if range.start >= self.len || range.is_empty() {
            self.segs.len()
        } else {
            self.locate(range.start).0
        };
        self.segs[start_k..]
            .iter()
            .zip(&self.offsets[start_k..])
            .take_while(move |(_, &off)| off < range.end)
            .map(move |(s, &off)| {
                let lo = range.start.saturating_sub(off) as u32;
                let hi = ((range.end - off) as u32).min(s.len);
                (*s, lo, hi)
            })
    }

    /// Sub-line of positions `range`, in the same order.
    pub fn slice(&self, range: Range<usize>) -> Result<Line, ModelError> {
        if range.end > self.len || range.start > range.end {
            return Err(ModelError::PositionOutOfRange { position: range.end, len: self.len });
        }
        let mut line = Line::default();
        for (s, lo, hi) in self.seg_pieces(range) {
            line.push_segment(s.sub(lo, hi));
        }
        Ok(line)
    }

    pub fn reversed(&self) -> Line {
        let mut line = Line::default();
        for s in self.segs.iter().rev() {
            line.push_segment(s.reversed());
        }
        line
    }

    /// This line with the goods of `removed` taken out, order otherwise kept.
    pub fn without(&self, removed: &Bundle) -> Line {
        let mut line = Line::default();
        for s in &self.segs {
            let idx = s.index_range(0, s.len);
            let keep = Bundle::range(idx).difference(removed);
            let runs: Vec<Range<usize>> = keep.runs().collect();
            if s.descending {
                for r in runs.into_iter().rev() {
                    line.push_range(r.start as u32, r.end as u32, true);
                }
            } else {
                for r in runs {
                    line.push_range(r.start as u32, r.end as u32, false);
                }
            }
        }
        line
    }

    /// Concatenation of several lines, left to right. Goods must be distinct.
    pub fn concat<'a, I: IntoIterator<Item = &'a Line>>(parts: I) -> Result<Line, ModelError> {
        let mut line = Line::default();
        let mut seen = Bundle::empty();
        for part in parts {
            let goods = part.goods();
            if !goods.is_disjoint(&seen) {
                let dup = goods.intersection(&seen).first().expect("nonempty intersection");
                return Err(ModelError::DuplicateGood(dup));
            }
            seen = seen.union(&goods);
            for s in &part.segs {
                line.push_segment(*s);
            }
        }
        Ok(line)
    }

    /// Goods in line order. O(len).
    pub fn iter(&self) -> impl Iterator<Item = GoodId> + '_ {
        self.segs.iter().flat_map(|s| (0..s.len).map(move |o| GoodId::from_raw(s.at(o))))
    }

    pub fn to_order(&self) -> Vec<usize> {
        self.iter().map(GoodId::index).collect()
    }

    /// Positions `(start, end)` when `bundle` is a contiguous block of this line.
    pub fn block_span(&self, bundle: &Bundle) -> Option<Range<usize>> {
        if bundle.is_empty() {
            return Some(0..0);
        }
        let positions: Option<Vec<usize>> = bundle.goods().map(|g| self.position_of(g)).collect();
        let mut positions = positions?;
        positions.sort_unstable();
        let (lo, hi) = (positions[0], positions[positions.len() - 1]);
        (hi - lo + 1 == positions.len()).then_some(lo..hi + 1)
    }
}

impl Serialize for Line {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(GoodId::index))
    }
}

impl<'de> Deserialize<'de> for Line {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let order = Vec::<usize>::deserialize(deserializer)?;
        let goods: Vec<GoodId> = order.into_iter().map(GoodId::new).collect();
        Line::from_order(&goods).map_err(serde::de::Error::custom)
    }
}

/// The first `position` goods of `line` as a contiguous bundle.
pub fn prefix_bundle(line: &Line, position: usize) -> Result<Bundle, ModelError> {
    line.prefix(position)
}

/// The goods after the first `position` of `line` as a contiguous bundle.
pub fn suffix_bundle(line: &Line, position: usize) -> Result<Bundle, ModelError> {
    line.suffix(position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(i: usize) -> GoodId {
        GoodId::new(i)
    }

    #[test]
    fn identity_prefix_and_suffix() {
        let line = Line::identity(4);
        assert_eq!(prefix_bundle(&line, 2).unwrap(), Bundle::from_indices(&[0, 1]).unwrap());
        assert_eq!(prefix_bundle(&line, 0).unwrap(), Bundle::empty());
        assert_eq!(suffix_bundle(&line, 4).unwrap(), Bundle::empty());
        assert!(prefix_bundle(&line, 5).is_err());
        assert_eq!(line.segment_count(), 1);
    }

    #[test]
    fn reversed_line_prefix() {
        let line = Line::identity(3).reversed();
        assert_eq!(prefix_bundle(&line, 1).unwrap(), Bundle::singleton(g(2)));
        assert_eq!(line.segment_count(), 1);
        assert_eq!(line.to_order(), vec![2, 1, 0]);
    }

    #[test]
    fn goods_moved_to_ends_stay_compact() {
        let base = Line::identity(1000);
        let moved = Bundle::from_indices(&[10, 500]).unwrap();
        let line = Line::concat([
            &Line::singleton(g(500)),
            &base.without(&moved),
            &Line::singleton(g(10)),
        ])
        .unwrap();
        assert_eq!(line.segment_count(), 5);
        assert!(line.is_permutation_of(1000));
        assert_eq!(line.good_at(0).unwrap(), g(500));
        assert_eq!(line.good_at(999).unwrap(), g(10));
        assert_eq!(line.position_of(g(11)), Some(11));
    }

    #[test]
    fn permutation_validation() {
        assert!(Line::permutation(&[1, 0, 2], 3).is_ok());
        assert!(Line::permutation(&[1, 1, 2], 3).is_err());
        assert!(Line::permutation(&[1, 3, 2], 3).is_err());
        assert!(Line::permutation(&[1, 0], 3).is_err());
    }

    proptest! {
        #[test]
        fn position_lookup_agrees_with_order(perm in Just((0..30usize).collect::<Vec<_>>()).prop_shuffle(), lo in 0usize..30, len in 0usize..30) {
            let line = Line::permutation(&perm, 30).unwrap();
            prop_assert_eq!(line.to_order(), perm.clone());
            for (pos, &good) in perm.iter().enumerate() {
                prop_assert_eq!(line.good_at(pos).unwrap(), g(good));
                prop_assert_eq!(line.position_of(g(good)), Some(pos));
            }
            let hi = (lo + len).min(30);
            let block = line.block(lo..hi).unwrap();
            let expect = Bundle::from_indices(&perm[lo..hi]).unwrap();
            prop_assert_eq!(&block, &expect);
            prop_assert_eq!(line.slice(lo..hi).unwrap().to_order(), perm[lo..hi].to_vec());
            prop_assert_eq!(line.reversed().to_order(), perm.iter().rev().copied().collect::<Vec<_>>());
            prop_assert_eq!(line.block_span(&block), if lo < hi { Some(lo..hi) } else { Some(0..0) });
            let kept = line.without(&block);
            let expect_kept: Vec<usize> = perm.iter().copied().filter(|i| !expect.contains(g(*i))).collect();
            prop_assert_eq!(kept.to_order(), expect_kept);
        }
    }
}
