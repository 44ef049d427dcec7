use crate::error::{Error, Result};

/// Affine map `x = x_0 + J ξ` from the reference simplex onto a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMap {
    pub dim: usize,
    pub origin: [f64; 3],
    /// `jacobian[r][c] = ∂x_r/∂ξ_c`.
    pub jacobian: [[f64; 3]; 3],
    pub det: f64,
    /// `J⁻ᵀ`; maps reference gradients to physical gradients.
    pub inv_transpose: [[f64; 3]; 3],
}

impl CellMap {
    /// `vertices` holds `dim + 1` points of dimension `dim`, row-major.
    pub fn new(dim: usize, vertices: &[f64]) -> Result<Self> {
        Self::for_cell(usize::MAX, dim, vertices)
    }

    /// Same as [`CellMap::new`], reporting `cell` in the degenerate-cell error.
    pub fn for_cell(cell: usize, dim: usize, vertices: &[f64]) -> Result<Self> {
        let mut origin = [0.0; 3];
        origin[..dim].copy_from_slice(&vertices[..dim]);
        let mut jacobian = [[0.0; 3]; 3];
        for c in 0..dim {
            for r in 0..dim {
                jacobian[r][c] = vertices[(c + 1) * dim + r] - origin[r];
            }
        }
        let j = &jacobian;
        let mut inv_transpose = [[0.0; 3]; 3];
        let det = if dim == 2 {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            inv_transpose[0][0] = j[1][1] / det;
            inv_transpose[0][1] = -j[1][0] / det;
            inv_transpose[1][0] = -j[0][1] / det;
            inv_transpose[1][1] = j[0][0] / det;
            det
        } else {
            // cofactor matrix divided by det is J⁻ᵀ
            let mut cof = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                    let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                    cof[r][c] = j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1];
                }
            }
            let det = j[0][0] * cof[0][0] + j[0][1] * cof[0][1] + j[0][2] * cof[0][2];
            for r in 0..3 {
                for c in 0..3 {
                    inv_transpose[r][c] = cof[r][c] / det;
                }
            }
            det
        };
        if det.is_nan() || det.abs() < 1e-14 {
            return Err(Error::DegenerateCell { cell, det });
        }
        Ok(Self { dim, origin, jacobian, det, inv_transpose })
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    /// Cell volume, `|det J| / dim!`.
    pub fn volume(&self) -> f64 {
        self.abs_det() / if self.dim == 2 { 2.0 } else { 6.0 }
    }

    pub fn map_point(&self, reference: &[f64], out: &mut [f64]) {
        for r in 0..self.dim {
            out[r] = self.origin[r] + (0..self.dim).map(|c| self.jacobian[r][c] * reference[c]).sum::<f64>();
        }
    }

    pub fn push_gradient(&self, reference: &[f64], out: &mut [f64]) {
        for r in 0..self.dim {
            out[r] = (0..self.dim).map(|c| self.inv_transpose[r][c] * reference[c]).sum();
        }
    }

    /// Physical gradients of the `dim + 1` P1 basis functions (constant on the cell).
    pub fn p1_gradients(&self) -> [[f64; 3]; 4] {
        let mut grads = [[0.0; 3]; 4];
        for i in 1..=self.dim {
            // reference gradient of φ_i is e_{i-1}, so J⁻ᵀ e_{i-1} is column i-1
            for r in 0..self.dim {
                grads[i][r] = self.inv_transpose[r][i - 1];
                grads[0][r] -= grads[i][r];
            }
        }
        grads
    }
}
