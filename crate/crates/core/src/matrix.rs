//! Dense row-major matrices over `f64`.
//!
//! This is deliberately a small, self-contained matrix type: the rest of
//! the crate needs ordinary arithmetic, Frobenius geometry, and the
//! factorizations in [`crate::decomp`], nothing more. Entries are
//! validated to be finite on construction; arithmetic on matrices with
//! mismatched shapes is a programming error and panics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Fails if the entry count does not equal `rows * cols`, if either
    /// dimension is zero, or if any entry is non-finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::contract(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some((i, v)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::contract(format!(
                "entry {i} ({}, {}) is not finite: {v}",
                i / cols,
                i % cols
            )));
        }
        Ok(Matrix { rows, cols, entries })
    }

    /// Builds a matrix without the finiteness check.
    ///
    /// Internal arithmetic uses this to avoid re-scanning entries it just
    /// produced; anything that can overflow (training updates) re-checks
    /// explicitly via [`Matrix::all_finite`].
    pub(crate) fn from_raw(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Matrix { rows, cols, entries }
    }

    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// Square diagonal matrix from the given diagonal entries.
    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` at every position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix::from_raw(rows, cols, entries)
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `(rows, cols)` pair.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// True for 1x1 matrices.
    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    /// Entry at `(i, j)`. Panics when out of range.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        self.entries[i * self.cols + j]
    }

    /// Sets the entry at `(i, j)`. Panics when out of range.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        self.entries[i * self.cols + j] = v;
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Transpose.
    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        out
    }

    /// Entrywise sum. Panics on shape mismatch.
    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "add: shape mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Matrix::from_raw(self.rows, self.cols, entries)
    }

    /// Entrywise difference `self - other`. Panics on shape mismatch.
    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "sub: shape mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Matrix::from_raw(self.rows, self.cols, entries)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Matrix {
        let entries = self.entries.iter().map(|a| a * s).collect();
        Matrix::from_raw(self.rows, self.cols, entries)
    }

    /// Matrix product `self * other`. Panics when inner dimensions differ.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul: inner dimensions differ ({}x{} * {}x{})",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        // i-k-j loop order keeps both the `other` row and the output row
        // contiguous in memory; this loop dominates training time.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let src = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Gram matrix `self^T * self`.
    pub fn gram(&self) -> Matrix {
        self.transpose().matmul(self)
    }

    /// Outer Gram matrix `self * self^T`.
    pub fn outer_gram(&self) -> Matrix {
        self.matmul(&self.transpose())
    }

    /// Frobenius inner product `<self, other> = sum_ij self_ij * other_ij`.
    pub fn frob_inner(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "frob_inner: shape mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|v| v * v).sum())
    }

    /// Frobenius distance `||self - other||_F`. Panics on shape mismatch.
    pub fn frob_dist(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "frob_dist: shape mismatch");
        libm::sqrt(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "trace: matrix must be square");
        (0..self.rows).map(|i| self.entries[i * self.cols + i]).sum()
    }

    /// Largest absolute deviation from symmetry, `max_ij |A_ij - A_ji|`,
    /// for square matrices.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "asymmetry: matrix must be square");
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self.entries[i * self.cols + j] - self.entries[j * self.cols + i]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Embeds `block` into a `rows x cols` zero matrix with the block's
    /// upper-left corner at position `(0, 0)`.
    ///
    /// Used by the balanced initializer to pad factor cores out to the
    /// layer dimensions. Panics when the block does not fit.
    pub fn embed_top_left(block: &Matrix, rows: usize, cols: usize) -> Matrix {
        assert!(
            block.rows <= rows && block.cols <= cols,
            "embed_top_left: {}x{} block does not fit in {rows}x{cols}",
            block.rows,
            block.cols
        );
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                out.entries[i * cols + j] = block.entries[i * block.cols + j];
            }
        }
        out
    }
}
