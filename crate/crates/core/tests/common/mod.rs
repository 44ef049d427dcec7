//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use stfem::assembly::{CoefficientField, DofMap};
use stfem::manufactured::{Homogeneity, ManufacturedSolution};
use stfem::mesh::Geometry;
use stfem::sparse::CsrMatrix;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn dense_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if p != k {
            a.swap(k, p);
            det = -det;
        }
        det *= a[k][k];
        if a[k][k] == 0.0 {
            return 0.0;
        }
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    det
}

pub fn relative_difference(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm.max(f64::MIN_POSITIVE)
}

/// Random sparse nonsingular matrix: a diagonally dominant matrix with its
/// rows shuffled, so that a solver without pivoting meets zero diagonals.
pub fn random_sparse_matrix(rng: &mut impl Rng, n: usize, density: f64) -> CsrMatrix {
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for j in (0..n).filter(|&j| j != i) {
                if rng.gen_bool(density) {
                    row.push((j, rng.gen_range(-1.0..1.0)));
                }
            }
            let off: f64 = row.iter().map(|(_, v)| f64::abs(*v)).sum();
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            row.push((i, sign * (off + rng.gen_range(0.5..2.0))));
            row
        })
        .collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        rows.swap(i, j);
    }
    let triplets: Vec<(usize, usize, f64)> =
        rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v))).collect();
    CsrMatrix::from_triplets(n, n, &triplets).unwrap()
}

/// Random simplex with `|det| ≥ 0.05` in dimension `dim`, vertices row-major.
pub fn random_simplex(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim * (dim + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let edges: Vec<Vec<f64>> = (0..dim).map(|r| (0..dim).map(|c| v[(c + 1) * dim + r] - v[r]).collect()).collect();
        if dense_det(edges).abs() >= 0.05 {
            return v;
        }
    }
}

/// Affine P1 functions `φ_i(x) = g_i·x + c_i` of a simplex, from the
/// Vandermonde system `[x_k 1] (g_i, c_i) = δ_ik`.
pub fn affine_basis(vertices: &[f64], dim: usize) -> Vec<(Vec<f64>, f64)> {
    let vander: Vec<Vec<f64>> = (0..=dim)
        .map(|k| {
            let mut row = vertices[k * dim..(k + 1) * dim].to_vec();
            row.push(1.0);
            row
        })
        .collect();
    (0..=dim)
        .map(|i| {
            let e: Vec<f64> = (0..=dim).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
            let coef = dense_solve(vander.clone(), e).unwrap();
            (coef[..dim].to_vec(), coef[dim])
        })
        .collect()
}

/// Collapsed tensor Gauss-Legendre rule on the reference simplex
/// (three points per direction).
pub fn collapsed_rule(dim: usize) -> Vec<(Vec<f64>, f64)> {
    let r = (0.6f64).sqrt();
    let gauss = [(0.5 - 0.5 * r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + 0.5 * r, 5.0 / 18.0)];
    let mut out = Vec::new();
    match dim {
        2 => {
            for &(u, wu) in &gauss {
                for &(v, wv) in &gauss {
                    out.push((vec![u, v * (1.0 - u)], wu * wv * (1.0 - u)));
                }
            }
        }
        3 => {
            for &(u, wu) in &gauss {
                for &(v, wv) in &gauss {
                    for &(w, ww) in &gauss {
                        let xi = vec![u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)];
                        out.push((xi, wu * wv * ww * (1.0 - u).powi(2) * (1.0 - v)));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Element matrix of `∫ (∂_t φ_j) φ_i + (A ∇_x φ_j)·∇_x φ_i` with constant
/// `A`, evaluated from the Vandermonde basis and the collapsed rule.
pub fn brute_force_local_matrix(vertices: &[f64], dim: usize, a: [[f64; 2]; 2]) -> Vec<Vec<f64>> {
    let basis = affine_basis(vertices, dim);
    let edges: Vec<Vec<f64>> =
        (0..dim).map(|r| (0..dim).map(|c| vertices[(c + 1) * dim + r] - vertices[r]).collect()).collect();
    let jac = dense_det(edges.clone()).abs();
    let d = dim - 1;
    let mut out = vec![vec![0.0; dim + 1]; dim + 1];
    for (xi, w) in collapsed_rule(dim) {
        let x: Vec<f64> = (0..dim).map(|r| vertices[r] + (0..dim).map(|c| edges[r][c] * xi[c]).sum::<f64>()).collect();
        let phi: Vec<f64> = basis.iter().map(|(g, c)| g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + c).collect();
        for i in 0..=dim {
            for j in 0..=dim {
                let (gi, gj) = (&basis[i].0, &basis[j].0);
                let mut diffusion = 0.0;
                for r in 0..d {
                    for s in 0..d {
                        diffusion += a[r][s] * gj[s] * gi[r];
                    }
                }
                out[i][j] += w * jac * (gj[d] * phi[i] + diffusion);
            }
        }
    }
    out
}

/// `u = x + t` (or `x − 2y + t`) on `geometry`, with the matching source `f = 1`.
pub fn affine_solution(geometry: Geometry) -> ManufacturedSolution {
    let mut sol = stfem::manufactured::affine();
    sol.geometry = geometry;
    sol.homogeneity = Homogeneity { initial: false, lateral: false, terminal: false };
    if geometry.spatial_dim() == 2 {
        sol.coefficient = CoefficientField::identity(2);
        sol.u = std::sync::Arc::new(|p: &[f64]| p[0] - 2.0 * p[1] + p[2]);
        sol.grad_x_u = std::sync::Arc::new(|_: &[f64]| [1.0, -2.0]);
    }
    sol
}

pub fn random_free_vector(rng: &mut impl Rng, dofmap: &DofMap) -> Vec<f64> {
    (0..dofmap.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
