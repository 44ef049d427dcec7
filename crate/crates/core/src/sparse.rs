//! Compressed-row sparse matrices.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A real matrix in compressed-row storage with strictly increasing column
/// indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets. Columns are sorted
    /// and deduplicated.
    pub fn from_pattern(nrows: usize, ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            debug_assert!(row.last().is_none_or(|&c| c < ncols));
            col_indices.extend_from_slice(row);
            row_offsets.push(col_indices.len());
        }
        let values = vec![0.0; col_indices.len()];
        Self { nrows, ncols, row_offsets, col_indices, values }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in input order, so the result is a deterministic function of
    /// the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= nrows || c >= ncols) {
            return Err(Error::InvalidArgument(format!("entry ({r}, {c}) outside a {nrows}x{ncols} matrix")));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_offsets = vec![0; nrows + 1];
        let mut col_indices = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Position of `(r, c)` in the value array, if it is part of the pattern.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let start = self.row_offsets[r];
        let cols = &self.col_indices[start..self.row_offsets[r + 1]];
        cols.binary_search(&c).ok().map(|k| start + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to an entry of the pattern. Panics if `(r, c)` is not stored.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .position(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *out = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| a * b).sum()
    }

    /// Whether `A = Aᵀ` entry by entry, with bitwise equality.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).all(|(&c, &v)| self.position(c, r).is_some_and(|k| self.values[k] == v))
            })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        dense
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
