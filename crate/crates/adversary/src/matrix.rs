//! Exact Gaussian elimination over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalMatrix {
    cols: usize,
    rows: Vec<Vec<Q>>,
}

impl RationalMatrix {
    pub fn new(cols: usize) -> Self {
        RationalMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Q>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        RationalMatrix { cols, rows }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<Q>) {
        assert_eq!(row.len(), self.cols, "row length");
        self.rows.push(row);
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    pub fn rref(&self) -> Rref {
        self.rref_upto(self.cols)
    }

    /// Reduced row-echelon form with pivots only among the first `limit`
    /// columns; the remaining columns ride along (right-hand sides).
    /// Zero rows are dropped.
    pub fn rref_upto(&self, limit: usize) -> Rref {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit.min(self.cols) {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
            rows.swap(r, p);
            let inv = Q::one() / &rows[r][c];
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        Rref { matrix: RationalMatrix { cols: self.cols, rows }, pivots, leftover: self.rows.len() - r }
    }
}

/// A matrix in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
    /// How many input rows reduced to nothing in the pivot columns.
    pub leftover: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Coefficients expressing `v` (restricted to the pivot range) as a
    /// combination of the rows, or `None` if `v` is outside their span.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Q>> {
        let coeffs: Vec<Q> = self.pivots.iter().map(|&c| v[c].clone()).collect();
        let width = v.len();
        for c in 0..width {
            let mut s = Q::zero();
            for (k, row) in self.matrix.rows.iter().enumerate() {
                if !coeffs[k].is_zero() {
                    s += &coeffs[k] * &row[c];
                }
            }
            if s != v[c] {
                return None;
            }
        }
        Some(coeffs)
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Columns without a pivot among the first `limit`.
    pub fn free_columns(&self, limit: usize) -> Vec<usize> {
        (0..limit).filter(|c| !self.pivots.contains(c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rank() {
        let m = RationalMatrix::from_int_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn dependent_rows() {
        let m = RationalMatrix::from_int_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 2, 1]]);
        let r = m.rref();
        assert_eq!(r.rank(), 2);
        assert_eq!(r.leftover, 1);
        assert_eq!(r.coordinates(&[q(1), q(0), q(-1)]), Some(vec![q(1), q(0)]));
        assert!(!r.contains(&[q(0), q(0), q(1)]));
    }

    #[test]
    fn thirds_stay_exact() {
        let m = RationalMatrix::from_int_rows(&[vec![3, 1], vec![1, 3]]);
        let r = m.rref();
        assert_eq!(r.matrix.rows(), &[vec![q(1), q(0)], vec![q(0), q(1)]]);
        let aug = RationalMatrix::from_int_rows(&[vec![3, 1, 1], vec![1, 3, 0]]).rref_upto(2);
        assert_eq!(aug.matrix.rows()[0][2], Q::new(BigInt::from(3), BigInt::from(8)));
        assert_eq!(aug.matrix.rows()[1][2], Q::new(BigInt::from(-1), BigInt::from(8)));
    }
}
