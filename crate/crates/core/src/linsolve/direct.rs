//! Sparse direct factorizations backed by `faer`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, SymmetricOrdering};
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Column-compressed copy of `a` in faer's layout.
fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let (n, m) = (a.nrows(), a.ncols());
    let mut col_ptr = vec![0usize; m + 1];
    for &c in a.col_indices() {
        col_ptr[c + 1] += 1;
    }
    for c in 0..m {
        col_ptr[c + 1] += col_ptr[c];
    }
    let mut next = col_ptr.clone();
    let mut row_idx = vec![0usize; a.nnz()];
    let mut values = vec![0.0; a.nnz()];
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            row_idx[next[c]] = r;
            values[next[c]] = v;
            next[c] += 1;
        }
    }
    let symbolic = SymbolicSparseColMat::new_checked(n, m, col_ptr, None, row_idx);
    Ok(SparseColMat::new(symbolic, values))
}

fn solve_with(solver: &impl Solve<f64>, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    solver.solve_in_place(rhs.as_mut());
    (0..b.len()).map(|i| rhs[(i, 0)]).collect()
}

/// Number of stored entries in the Cholesky factor of the symmetrized
/// pattern of `a` under an approximate minimum degree ordering.
pub fn symmetric_fill_estimate(a: &CsrMatrix) -> Result<usize> {
    let mat = to_faer(a)?;
    let symbolic = factorize_symbolic_cholesky(
        mat.symbolic(),
        Side::Lower,
        SymmetricOrdering::Amd,
        Default::default(),
    )
    .map_err(|e| Error::Resource(format!("symbolic analysis failed: {e:?}")))?;
    Ok(symbolic.len_val())
}

/// Sparse LU with partial pivoting and a fill-reducing column ordering.
pub struct DirectLu {
    lu: Lu<usize, f64>,
}

impl DirectLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mat = to_faer(a)?;
        let symbolic = SymbolicLu::try_new(mat.symbolic())
            .map_err(|e| Error::Resource(format!("symbolic LU failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                Error::SingularMatrix(format!("structurally singular at column {index}"))
            }
            other => Error::Resource(format!("numeric LU failed: {other:?}")),
        })?;
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        solve_with(&self.lu, b)
    }
}

/// Sparse Cholesky `LLᵀ` of a symmetric positive definite matrix.
pub struct SparseCholesky {
    llt: Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mat = to_faer(a)?;
        let symbolic = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
            .map_err(|e| Error::Resource(format!("symbolic Cholesky failed: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(symbolic, mat.as_ref(), Side::Lower)
            .map_err(|e| Error::SingularMatrix(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(Self { llt })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        solve_with(&self.llt, b)
    }
}
