//! Square matrices over an exact scalar.
//!
//! The representation is a flat row-major `Vec<T>` with the dimension held
//! alongside, so the same type serves 2×2 word-ball elements and the larger
//! polynomial matrices built during elimination. All operations are exact;
//! nothing here rounds.

use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::scalar::{FieldScalar, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    EntryCount { dim: usize, expected: usize, got: usize },
    #[error("matrix dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix is singular")]
    Singular,
}

/// Dense square matrix, entries in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SquareMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    /// Builds a matrix from row-major entries; `entries.len()` must be `dim²`.
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::EntryCount { dim, expected: dim * dim, got: entries.len() });
        }
        Ok(SquareMatrix { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::EntryCount {
                dim,
                expected: dim * dim,
                got: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = T::one();
        }
        SquareMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SquareMatrix<U> {
        SquareMatrix { dim: self.dim, entries: self.entries.iter().map(f).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self == &Self::identity(self.dim)
    }

    /// Exact matrix product.
    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.dim != rhs.dim {
            return Err(LinalgError::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = T::zero();
                for k in 0..d {
                    acc = acc + self.entries[i * d + k].clone() * rhs.entries[k * d + j].clone();
                }
                entries.push(acc);
            }
        }
        Ok(SquareMatrix { dim: d, entries })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.dim != rhs.dim {
            return Err(LinalgError::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let entries =
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(SquareMatrix { dim: self.dim, entries })
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            acc = acc + self.entries[i * self.dim + i].clone();
        }
        acc
    }

    /// `self` raised to a non-negative power by repeated squaring.
    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).expect("same dimension");
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        acc
    }
}

impl<T: Scalar + Signed + Ord> SquareMatrix<T> {
    /// Largest absolute value of an entry.
    pub fn sup_norm(&self) -> T {
        self.entries.iter().map(|e| e.abs()).max().expect("matrices have at least one entry")
    }
}

impl<T: FieldScalar> SquareMatrix<T> {
    /// Exact inverse by Gauss–Jordan elimination; pivots are the first
    /// nonzero candidate in each column, which is always sound over an exact
    /// field.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let d = self.dim;
        let mut work = self.entries.clone();
        let mut inv = Self::identity(d).entries;

        for col in 0..d {
            let pivot_row =
                (col..d).find(|&r| !work[r * d + col].is_zero()).ok_or(LinalgError::Singular)?;
            if pivot_row != col {
                for j in 0..d {
                    work.swap(col * d + j, pivot_row * d + j);
                    inv.swap(col * d + j, pivot_row * d + j);
                }
            }
            let pivot = work[col * d + col].clone();
            for j in 0..d {
                work[col * d + j] = work[col * d + j].clone() / pivot.clone();
                inv[col * d + j] = inv[col * d + j].clone() / pivot.clone();
            }
            for r in 0..d {
                if r == col || work[r * d + col].is_zero() {
                    continue;
                }
                let factor = work[r * d + col].clone();
                for j in 0..d {
                    work[r * d + j] =
                        work[r * d + j].clone() - factor.clone() * work[col * d + j].clone();
                    inv[r * d + j] =
                        inv[r * d + j].clone() - factor.clone() * inv[col * d + j].clone();
                }
            }
        }
        Ok(SquareMatrix { dim: d, entries: inv })
    }
}

impl<T: fmt::Display> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            write!(f, "[")?;
            for c in 0..self.dim {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entries[r * self.dim + c])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
