/// Values and reference gradients of the `m + 1` P1 basis functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Eval {
    pub dim: usize,
    pub values: [f64; 4],
    /// `gradients[i][k] = ∂φ_i/∂ξ_k`.
    pub gradients: [[f64; 3]; 4],
}

/// Evaluates the P1 basis of the reference simplex of dimension `dim` (2 or 3)
/// at `point`. Basis function 0 belongs to the origin, basis function `i ≥ 1`
/// to the unit vertex `e_i`.
pub fn eval_p1(dim: usize, point: &[f64]) -> P1Eval {
    debug_assert!(dim == 2 || dim == 3);
    let mut values = [0.0; 4];
    let mut gradients = [[0.0; 3]; 4];
    values[0] = 1.0 - point[..dim].iter().sum::<f64>();
    for k in 0..dim {
        values[k + 1] = point[k];
        gradients[0][k] = -1.0;
        gradients[k + 1][k] = 1.0;
    }
    P1Eval { dim, values, gradients }
}
