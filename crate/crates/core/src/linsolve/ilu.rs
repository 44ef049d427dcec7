//! Incomplete LU factorization with zero fill-in.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// ILU(0): unit lower factor and upper factor sharing the pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let row_offsets = a.row_offsets().to_vec();
        let col_indices = a.col_indices().to_vec();
        let mut values = a.values().to_vec();
        let mut diag = Vec::with_capacity(n);
        for r in 0..n {
            let k = a
                .position(r, r)
                .ok_or_else(|| Error::SingularMatrix(format!("ILU(0): no diagonal entry in row {r}")))?;
            diag.push(k);
        }

        // position of column c in the current row, or usize::MAX
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            for p in start..end {
                marker[col_indices[p]] = p;
            }
            for p in start..end {
                let k = col_indices[p];
                if k >= i {
                    break;
                }
                let pivot = values[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::SingularMatrix(format!("ILU(0): zero pivot in row {k}")));
                }
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag[k] + 1..row_offsets[k + 1] {
                    let target = marker[col_indices[q]];
                    if target != usize::MAX {
                        values[target] -= lik * values[q];
                    }
                }
            }
            for p in start..end {
                marker[col_indices[p]] = usize::MAX;
            }
            if values[diag[i]] == 0.0 {
                return Err(Error::SingularMatrix(format!("ILU(0): zero pivot in row {i}")));
            }
        }
        Ok(Self { row_offsets, col_indices, values, diag })
    }

    /// Overwrites `x` with `(LU)⁻¹ x`.
    pub fn apply_in_place(&self, x: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut s = x[i];
            for p in self.row_offsets[i]..self.diag[i] {
                s -= self.values[p] * x[self.col_indices[p]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in self.diag[i] + 1..self.row_offsets[i + 1] {
                s -= self.values[p] * x[self.col_indices[p]];
            }
            x[i] = s / self.values[self.diag[i]];
        }
    }
}
