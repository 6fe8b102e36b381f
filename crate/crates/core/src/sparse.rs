//! Compressed-row sparse complex matrices and the Hermitian wrapper used for
//! sector Hamiltonians.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Complex matrix in compressed-row form. Column indices within a row are
/// sorted and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Build from `(row, col, value)` triplets. Duplicates are summed; entries
    /// that sum to exactly zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds for {rows}x{cols}");
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != C64::new(0.0, 0.0));

        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = merged.iter().map(|e| e.1).collect();
        let values = merged.iter().map(|e| e.2).collect();
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, std::iter::empty())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(r, c, v)| (r, c, v * s)))
    }

    /// Sum of two matrices of equal shape.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut trip = Vec::new();
        for (r, k, a) in self.iter() {
            for idx in other.row_ptr[k]..other.row_ptr[k + 1] {
                trip.push((r, other.col_idx[idx], a * other.values[idx]));
            }
        }
        Self::from_triplets(self.rows, other.cols, trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.cols);
        DVector::from_fn(self.rows, |r, _| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|k| self.values[k] * x[self.col_idx[k]])
                .sum()
        })
    }

    /// `out += alpha * self * m`.
    pub fn mul_dense_acc(&self, m: &DMatrix<C64>, alpha: C64, out: &mut DMatrix<C64>) {
        assert_eq!(m.nrows(), self.cols);
        assert_eq!((out.nrows(), out.ncols()), (self.rows, m.ncols()));
        for c in 0..m.ncols() {
            let src = m.column(c);
            let mut dst = out.column_mut(c);
            for r in 0..self.rows {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * src[self.col_idx[k]];
                }
                dst[r] += alpha * acc;
            }
        }
    }

    /// `out += alpha * m * self^dagger`.
    pub fn dense_mul_adjoint_acc(&self, m: &DMatrix<C64>, alpha: C64, out: &mut DMatrix<C64>) {
        assert_eq!(m.ncols(), self.cols);
        assert_eq!((out.nrows(), out.ncols()), (m.nrows(), self.rows));
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let w = alpha * self.values[k].conj();
                let j = self.col_idx[k];
                let src = m.column(j);
                let mut dst = out.column_mut(i);
                for r in 0..m.nrows() {
                    dst[r] += w * src[r];
                }
            }
        }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (_, c, v) in self.iter() {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// Sparse matrix with exact structural Hermiticity: both triangles are stored
/// and `entry(i, j) == conj(entry(j, i))` bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian(SparseMatrix);

impl SparseHermitian {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        for (r, c, v) in matrix.iter() {
            if matrix.get(c, r) != v.conj() {
                return Err(Error::InvalidParams(format!("entry ({r}, {c}) breaks Hermiticity")));
            }
        }
        Ok(Self(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.0.to_dense()
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|(_, _, v)| v.im == 0.0)
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        psi.dotc(&self.0.mul_vec(psi)).re
    }

    /// Coordinate dump in Matrix Market form: 1-based `row col re im` lines.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        out.push_str("%%MatrixMarket matrix coordinate complex general\n");
        let _ = writeln!(out, "{} {} {}", self.dim(), self.dim(), self.0.nnz());
        for (r, c, v) in self.0.iter() {
            let _ = writeln!(out, "{} {} {:.17e} {:.17e}", r + 1, c + 1, v.re, v.im);
        }
        out
    }
}
