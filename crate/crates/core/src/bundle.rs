//! Sets of goods stored as sorted runs of consecutive indices.
//!
//! A bundle built from a block of an identity-ordered line is a single run,
//! so prefix and suffix queries over millions of goods stay O(1) in size.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;
use crate::GoodId;

/// A set of goods. Runs are half-open, sorted, disjoint and never adjacent,
/// so equal sets have equal representations.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle {
    runs: Vec<(u32, u32)>,
}

impl Bundle {
    pub fn empty() -> Self {
        Bundle::default()
    }

    pub fn singleton(g: GoodId) -> Self {
        let i = g.raw();
        Bundle { runs: vec![(i, i + 1)] }
    }

    /// Goods with indices in `range`.
    pub fn range(range: Range<usize>) -> Self {
        if range.is_empty() {
            return Bundle::empty();
        }
        Bundle { runs: vec![(range.start as u32, range.end as u32)] }
    }

    /// All goods `0..m`.
    pub fn all(m: usize) -> Self {
        Bundle::range(0..m)
    }

    /// Builds a bundle from goods in any order; duplicates are rejected.
    pub fn from_goods<I: IntoIterator<Item = GoodId>>(goods: I) -> Result<Self, ModelError> {
        let mut idx: Vec<u32> = goods.into_iter().map(GoodId::raw).collect();
        idx.sort_unstable();
        if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateGood(GoodId::from_raw(w[0])));
        }
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for i in idx {
            match runs.last_mut() {
                Some(last) if last.1 == i => last.1 += 1,
                _ => runs.push((i, i + 1)),
            }
        }
        Ok(Bundle { runs })
    }

    /// Builds a bundle from index ranges in any order; overlaps are merged.
    pub fn from_ranges<I: IntoIterator<Item = Range<usize>>>(ranges: I) -> Self {
        let mut rs: Vec<(u32, u32)> = ranges
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| (r.start as u32, r.end as u32))
            .collect();
        rs.sort_unstable();
        let mut runs: Vec<(u32, u32)> = Vec::with_capacity(rs.len());
        for (a, b) in rs {
            match runs.last_mut() {
                Some(last) if last.1 >= a => last.1 = last.1.max(b),
                _ => runs.push((a, b)),
            }
        }
        Bundle { runs }
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self, ModelError> {
        Bundle::from_goods(indices.iter().map(|&i| GoodId::new(i)))
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|&(a, b)| (b - a) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of maximal runs of consecutive indices.
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn runs(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.runs.iter().map(|&(a, b)| a as usize..b as usize)
    }

    pub fn contains(&self, g: GoodId) -> bool {
        let i = g.raw();
        match self.runs.binary_search_by(|&(a, _)| a.cmp(&i)) {
            Ok(_) => true,
            Err(0) => false,
            Err(k) => self.runs[k - 1].1 > i,
        }
    }

    pub fn goods(&self) -> impl Iterator<Item = GoodId> + '_ {
        self.runs.iter().flat_map(|&(a, b)| (a..b).map(GoodId::from_raw))
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.goods().map(GoodId::index).collect()
    }

    /// One past the largest index, or 0 for the empty bundle.
    pub fn upper_bound(&self) -> usize {
        self.runs.last().map_or(0, |&(_, b)| b as usize)
    }

    pub fn first(&self) -> Option<GoodId> {
        self.runs.first().map(|&(a, _)| GoodId::from_raw(a))
    }

    /// Fails if any good is outside `0..m`.
    pub fn check_range(&self, m: usize) -> Result<(), ModelError> {
        if self.upper_bound() > m {
            return Err(ModelError::GoodOutOfRange {
                good: GoodId::new(self.upper_bound() - 1),
                m,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        Bundle::from_ranges(self.runs().chain(other.runs()))
    }

    pub fn with(&self, g: GoodId) -> Bundle {
        self.union(&Bundle::singleton(g))
    }

    pub fn without(&self, g: GoodId) -> Bundle {
        self.difference(&Bundle::singleton(g))
    }

    pub fn intersection(&self, other: &Bundle) -> Bundle {
        let (mut i, mut j) = (0, 0);
        let mut runs = Vec::new();
        while i < self.runs.len() && j < other.runs.len() {
            let (a0, a1) = self.runs[i];
            let (b0, b1) = other.runs[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                runs.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Bundle { runs }
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        let mut runs = Vec::new();
        let mut j = 0;
        for &(a0, a1) in &self.runs {
            let mut start = a0;
            while j < other.runs.len() && other.runs[j].1 <= start {
                j += 1;
            }
            let mut k = j;
            while start < a1 {
                match other.runs.get(k) {
                    Some(&(b0, b1)) if b0 < a1 => {
                        if b0 > start {
                            runs.push((start, b0));
                        }
                        start = start.max(b1);
                        k += 1;
                    }
                    _ => {
                        runs.push((start, a1));
                        break;
                    }
                }
            }
        }
        Bundle { runs }
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.intersection(other).is_empty()
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, &(a, b)) in self.runs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            if b == a + 1 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}..{}", b - 1)?;
            }
        }
        write!(f, "}}")
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.goods().map(GoodId::index))
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(deserializer)?;
        Bundle::from_indices(&idx).map_err(serde::de::Error::custom)
    }
}
