//! Dense matrices of exact rationals and exact Gaussian elimination.
//!
//! Matrices here are small (at most tens of rows), so the solver favours
//! determinism and exactness: elimination over normalized rationals with the
//! first nonzero entry as pivot. No floating point anywhere.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat_string, Rat};

/// Dense row-major matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    #[serde(with = "crate::rational::serde_rat_vec")]
    data: Vec<Rat>,
}

impl RationalMatrix {
    /// Zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    /// Builds entry-by-entry from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for row in &rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// n-by-n identity.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rat::one() } else { Rat::zero() })
    }

    /// Matrix of all ones.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Rat::one())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Exact matrix product; errors on inner-dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * rhs.get(k, j)).sum()
        }))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect())
    }

    /// `self * scalar`, entry-wise.
    pub fn scale(&self, scalar: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * scalar)
    }

    /// Entry-wise sum; shapes must agree.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + rhs.get(i, j)
        }))
    }

    pub fn column_sum(&self, j: usize) -> Rat {
        (0..self.rows).map(|i| self.get(i, j).clone()).sum()
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.row(i).iter().cloned().sum()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.rows)
    }

    pub fn trace(&self) -> Rat {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    /// Solves `self * X = rhs` for square `self` by exact Gauss-Jordan
    /// elimination, taking the first nonzero entry in each column as pivot.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: rhs.rows,
            });
        }
        let n = self.rows;
        // augmented [self | rhs]
        let mut aug: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .chain(rhs.row(i).iter())
                    .cloned()
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !aug[r][col].is_zero())
                .ok_or(Error::RankDeficient)?;
            aug.swap(col, pivot);
            let pv = aug[col][col].clone();
            for x in &mut aug[col] {
                *x = &*x / &pv;
            }
            let (above, rest) = aug.split_at_mut(col);
            let (pivot_row, below) = rest.split_first_mut().expect("pivot row exists");
            for row in above.iter_mut().chain(below.iter_mut()) {
                if !row[col].is_zero() {
                    let factor = row[col].clone();
                    for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        let delta = &factor * src;
                        *dst = &*dst - delta;
                    }
                }
            }
        }
        Ok(Self::from_fn(n, rhs.cols, |i, j| aug[i][n + j].clone()))
    }

    /// Exact inverse of a square matrix.
    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// Rows of `"p/q"` strings, for JSON payloads.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rat_string).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn multiply_and_transpose() {
        let a = RationalMatrix::from_rows(vec![
            vec![int(1), int(2)],
            vec![int(3), int(4)],
            vec![int(5), int(6)],
        ])
        .unwrap();
        let at = a.transpose();
        let g = at.mul(&a).unwrap();
        assert_eq!(g.get(0, 0), &int(35));
        assert_eq!(g.get(0, 1), &int(44));
        assert_eq!(g.get(1, 1), &int(56));
        assert_eq!(a.mul(&at).unwrap().rows(), 3);
    }

    #[test]
    fn inverse_round_trip() {
        let m = RationalMatrix::from_rows(vec![
            vec![ratio(5, 8), ratio(3, 8)],
            vec![ratio(3, 8), ratio(5, 8)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv.get(0, 0), &ratio(5, 2));
        assert_eq!(inv.get(0, 1), &ratio(-3, 2));
        assert!(m.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn singular_matrix_is_detected() {
        let m =
            RationalMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        assert_eq!(m.inverse().unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn solve_rectangular_rhs() {
        let a =
            RationalMatrix::from_rows(vec![vec![int(2), int(0)], vec![int(0), int(4)]]).unwrap();
        let rhs = RationalMatrix::from_rows(vec![
            vec![int(2), int(4), int(6)],
            vec![int(8), int(12), int(16)],
        ])
        .unwrap();
        let x = a.solve(&rhs).unwrap();
        assert_eq!(x.get(0, 2), &int(3));
        assert_eq!(x.get(1, 0), &int(2));
        assert_eq!(a.mul(&x).unwrap(), rhs);
    }
}
