//! Assembly of the space-time system and of the auxiliary Gram matrices.
//!
//! For trial function `φ_j` and test function `φ_i` the space-time form is
//!
//! ```text
//! a(φ_j, φ_i) = ∫ (∂_t φ_j) φ_i + (A ∇_x φ_j)·∇_x φ_i
//! ```
//!
//! where `∇_x` collects the spatial components of the space-time gradient and
//! `∂_t` is its last component. Dirichlet nodes (lateral closure and initial
//! slice) are eliminated: the matrix couples free dofs only and the
//! contribution of prescribed values is moved to the right-hand side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{eval_p1, CellMap, QuadratureRule};
use crate::mesh::{NodeKind, SpaceTimeMesh};
use crate::sparse::CsrMatrix;

/// Element matrix; only the leading `(m+1)×(m+1)` block is meaningful.
pub type LocalMatrix = [[f64; 4]; 4];

type CoefficientFn = dyn Fn(&[f64]) -> [[f64; 2]; 2] + Send + Sync;

/// Symmetric diffusion tensor `A(x, t)`, `d × d` with `d ≤ 2`, stored in the
/// leading block of a 2×2 array.
#[derive(Clone)]
pub struct CoefficientField {
    spatial_dim: usize,
    eval: Option<Arc<CoefficientFn>>,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("spatial_dim", &self.spatial_dim)
            .field("is_identity", &self.is_identity())
            .finish()
    }
}

impl CoefficientField {
    pub fn identity(spatial_dim: usize) -> Self {
        Self { spatial_dim, eval: None }
    }

    /// A variable coefficient given as a callback of the space-time point.
    pub fn new(spatial_dim: usize, eval: impl Fn(&[f64]) -> [[f64; 2]; 2] + Send + Sync + 'static) -> Self {
        Self { spatial_dim, eval: Some(Arc::new(eval)) }
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn is_identity(&self) -> bool {
        self.eval.is_none()
    }

    pub fn eval(&self, point: &[f64]) -> [[f64; 2]; 2] {
        match &self.eval {
            None => [[1.0, 0.0], [0.0, 1.0]],
            Some(f) => f(point),
        }
    }

    /// Checks symmetry and positive definiteness at the given points.
    pub fn check_at(&self, points: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        for p in points {
            let a = self.eval(&p);
            let min_eig = if self.spatial_dim == 1 {
                a[0][0]
            } else {
                if a[0][1] != a[1][0] {
                    return Err(Error::InvalidArgument(format!("coefficient not symmetric at {p:?}")));
                }
                let (tr, det) = (a[0][0] + a[1][1], a[0][0] * a[1][1] - a[0][1] * a[1][0]);
                0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt())
            };
            if min_eig.is_nan() || min_eig <= 0.0 {
                return Err(Error::InvalidArgument(format!("coefficient not positive definite at {p:?}")));
            }
        }
        Ok(())
    }
}

/// Status of a mesh node in the discrete space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofStatus {
    /// Index into the free ordering.
    Free(usize),
    /// Dirichlet node with its prescribed value.
    Constrained(f64),
}

/// Node-to-dof map separating free dofs from Dirichlet-constrained ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    status: Vec<DofStatus>,
    free_nodes: Vec<usize>,
}

impl DofMap {
    /// Zero data on the lateral boundary and the initial slice.
    pub fn homogeneous(mesh: &SpaceTimeMesh) -> Self {
        Self::build(mesh, |_| 0.0)
    }

    /// Dirichlet values `g(node)` on the lateral closure and initial slice.
    pub fn with_dirichlet(mesh: &SpaceTimeMesh, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let map = Self::build(mesh, g);
        if let Some(v) = map.status.iter().position(|s| matches!(s, DofStatus::Constrained(x) if !x.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite Dirichlet value at node {v}")));
        }
        Ok(map)
    }

    /// Every node free; used for Gram matrices over the full nodal space.
    pub fn all_free(n_nodes: usize) -> Self {
        Self { status: (0..n_nodes).map(DofStatus::Free).collect(), free_nodes: (0..n_nodes).collect() }
    }

    fn build(mesh: &SpaceTimeMesh, g: impl Fn(&[f64]) -> f64) -> Self {
        let mut free_nodes = Vec::new();
        let status = (0..mesh.n_vertices())
            .map(|v| match mesh.classify_node(v) {
                NodeKind::Free => {
                    free_nodes.push(v);
                    DofStatus::Free(free_nodes.len() - 1)
                }
                NodeKind::Constrained => DofStatus::Constrained(g(mesh.vertex(v))),
            })
            .collect();
        Self { status, free_nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.status.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn status(&self, node: usize) -> DofStatus {
        self.status[node]
    }

    pub fn free_index(&self, node: usize) -> Option<usize> {
        match self.status[node] {
            DofStatus::Free(k) => Some(k),
            DofStatus::Constrained(_) => None,
        }
    }

    /// Mesh node of free dof `k`.
    pub fn free_node(&self, k: usize) -> usize {
        self.free_nodes[k]
    }

    /// Full nodal vector from free-dof values plus the prescribed values.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        assert_eq!(free_values.len(), self.n_free());
        self.status
            .iter()
            .map(|s| match *s {
                DofStatus::Free(k) => free_values[k],
                DofStatus::Constrained(g) => g,
            })
            .collect()
    }

    /// Free-dof entries of a nodal vector.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.free_nodes.iter().map(|&v| nodal[v]).collect()
    }
}

/// Matrix and right-hand side of a linear system over the free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// Affine map of cell `c`.
pub fn cell_map(mesh: &SpaceTimeMesh, c: usize) -> Result<CellMap> {
    let mut coords = [0.0; 12];
    let m = mesh.simplex_dim();
    mesh.cell_coordinates(c, &mut coords[..m * (m + 1)]);
    CellMap::for_cell(c, m, &coords[..m * (m + 1)])
}

/// `∫_K (A ∇_x φ_j)·∇_x φ_i`. With a non-identity coefficient `A` is sampled
/// at the points of `rule`.
pub fn local_spatial_stiffness(map: &CellMap, a: &CoefficientField, rule: &QuadratureRule) -> LocalMatrix {
    let m = map.dim;
    let d = m - 1;
    let grads = map.p1_gradients();
    let mut out = [[0.0; 4]; 4];
    if a.is_identity() {
        let vol = map.volume();
        for i in 0..=m {
            for j in 0..=m {
                out[i][j] = vol * (0..d).map(|k| grads[i][k] * grads[j][k]).sum::<f64>();
            }
        }
        return out;
    }
    // ∫ A over the cell, then contract with the constant gradients
    let mut a_int = [[0.0; 2]; 2];
    let mut x = [0.0; 3];
    for (xi, w) in rule.iter() {
        map.map_point(xi, &mut x[..m]);
        let a_q = a.eval(&x[..m]);
        for r in 0..d {
            for s in 0..d {
                a_int[r][s] += w * map.abs_det() * a_q[r][s];
            }
        }
    }
    for i in 0..=m {
        for j in 0..=m {
            // grouped so that the (i, j) and (j, i) entries agree bitwise
            let mut v = 0.0;
            for r in 0..d {
                v += a_int[r][r] * (grads[i][r] * grads[j][r]);
                for s in r + 1..d {
                    v += a_int[r][s] * (grads[i][r] * grads[j][s] + grads[i][s] * grads[j][r]);
                }
            }
            out[i][j] = v;
        }
    }
    out
}

/// `∫_K (∂_t φ_j) φ_i = ∂_t φ_j · |K|/(m+1)`.
pub fn local_time_derivative(map: &CellMap) -> LocalMatrix {
    let m = map.dim;
    let grads = map.p1_gradients();
    let share = map.volume() / (m + 1) as f64;
    let mut out = [[0.0; 4]; 4];
    for row in out.iter_mut().take(m + 1) {
        for j in 0..=m {
            row[j] = grads[j][m - 1] * share;
        }
    }
    out
}

/// Element matrix of the space-time form.
pub fn local_matrix(map: &CellMap, a: &CoefficientField, rule: &QuadratureRule) -> LocalMatrix {
    let mut out = local_spatial_stiffness(map, a, rule);
    let conv = local_time_derivative(map);
    for (row, crow) in out.iter_mut().zip(conv) {
        for (v, c) in row.iter_mut().zip(crow) {
            *v += c;
        }
    }
    out
}

/// `∫_K φ_j φ_i` by quadrature.
pub fn local_mass(map: &CellMap, rule: &QuadratureRule) -> LocalMatrix {
    let m = map.dim;
    let mut out = [[0.0; 4]; 4];
    for (xi, w) in rule.iter() {
        let phi = eval_p1(m, xi).values;
        let wd = w * map.abs_det();
        for i in 0..=m {
            for j in 0..=m {
                out[i][j] += wd * (phi[i] * phi[j]);
            }
        }
    }
    out
}

/// `∫_K f φ_i` by quadrature.
pub fn local_load(map: &CellMap, f: &dyn Fn(&[f64]) -> f64, rule: &QuadratureRule) -> [f64; 4] {
    let m = map.dim;
    let mut out = [0.0; 4];
    let mut x = [0.0; 3];
    for (xi, w) in rule.iter() {
        map.map_point(xi, &mut x[..m]);
        let fw = w * map.abs_det() * f(&x[..m]);
        let phi = eval_p1(m, xi).values;
        for i in 0..=m {
            out[i] += fw * phi[i];
        }
    }
    out
}

/// Sparsity pattern coupling free dofs that share a cell.
fn free_pattern(mesh: &SpaceTimeMesh, dofmap: &DofMap) -> CsrMatrix {
    let n = dofmap.n_free();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cell in mesh.cells() {
        for &vi in cell {
            if let Some(i) = dofmap.free_index(vi) {
                rows[i].extend(cell.iter().filter_map(|&vj| dofmap.free_index(vj)));
            }
        }
    }
    CsrMatrix::from_pattern(n, n, rows)
}

/// Scatters element contributions in cell order. The Dirichlet lift of
/// constrained columns is subtracted from the right-hand side.
fn assemble_with(
    mesh: &SpaceTimeMesh,
    dofmap: &DofMap,
    mut local: impl FnMut(&CellMap) -> (LocalMatrix, [f64; 4]),
) -> Result<SparseSystem> {
    if dofmap.n_nodes() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "dof map covers {} nodes, mesh has {}",
            dofmap.n_nodes(),
            mesh.n_vertices()
        )));
    }
    let mut matrix = free_pattern(mesh, dofmap);
    let mut rhs = vec![0.0; dofmap.n_free()];
    for c in 0..mesh.n_cells() {
        let map = cell_map(mesh, c)?;
        let (elem, load) = local(&map);
        let cell = mesh.cell(c);
        for (i, &vi) in cell.iter().enumerate() {
            let Some(row) = dofmap.free_index(vi) else { continue };
            rhs[row] += load[i];
            for (j, &vj) in cell.iter().enumerate() {
                match dofmap.status(vj) {
                    DofStatus::Free(col) => matrix.add(row, col, elem[i][j]),
                    DofStatus::Constrained(g) => rhs[row] -= elem[i][j] * g,
                }
            }
        }
    }
    Ok(SparseSystem { matrix, rhs })
}

/// The discrete space-time problem: matrix of `a(·,·)` over free dofs and
/// right-hand side `∫ f φ_i` minus the Dirichlet lift.
pub fn assemble_system(
    mesh: &SpaceTimeMesh,
    dofmap: &DofMap,
    a: &CoefficientField,
    f: &dyn Fn(&[f64]) -> f64,
    quad_degree: usize,
) -> Result<SparseSystem> {
    let rule = crate::fem::quadrature(mesh.simplex_dim(), quad_degree)?;
    assemble_with(mesh, dofmap, |map| (local_matrix(map, a, &rule), local_load(map, f, &rule)))
}

/// Matrix of the time-derivative part `∫ (∂_t φ_j) φ_i` over free dofs.
pub fn assemble_time_derivative(mesh: &SpaceTimeMesh, dofmap: &DofMap) -> Result<CsrMatrix> {
    let homogeneous = zero_lift(dofmap);
    Ok(assemble_with(mesh, &homogeneous, |map| (local_time_derivative(map), [0.0; 4]))?.matrix)
}

/// `L²(Ω_T)` Gram matrix of the nodal basis over all nodes.
pub fn assemble_mass(mesh: &SpaceTimeMesh, quad_degree: usize) -> Result<CsrMatrix> {
    assemble_mass_on(mesh, &DofMap::all_free(mesh.n_vertices()), quad_degree)
}

/// `L²(Ω_T)` Gram matrix restricted to the free dofs of `dofmap`.
pub fn assemble_mass_on(mesh: &SpaceTimeMesh, dofmap: &DofMap, quad_degree: usize) -> Result<CsrMatrix> {
    let rule = crate::fem::quadrature(mesh.simplex_dim(), quad_degree)?;
    Ok(assemble_with(mesh, &zero_lift(dofmap), |map| (local_mass(map, &rule), [0.0; 4]))?.matrix)
}

/// `∫∫ (A ∇_x φ_j)·∇_x φ_i` over the free dofs of `dofmap`.
pub fn assemble_spatial_stiffness(mesh: &SpaceTimeMesh, dofmap: &DofMap, a: &CoefficientField) -> Result<CsrMatrix> {
    let rule = crate::fem::quadrature(mesh.simplex_dim(), 2)?;
    Ok(assemble_with(mesh, &zero_lift(dofmap), |map| (local_spatial_stiffness(map, a, &rule), [0.0; 4]))?.matrix)
}

fn zero_lift(dofmap: &DofMap) -> DofMap {
    let status = dofmap
        .status
        .iter()
        .map(|s| match *s {
            DofStatus::Constrained(_) => DofStatus::Constrained(0.0),
            free => free,
        })
        .collect();
    DofMap { status, free_nodes: dofmap.free_nodes.clone() }
}
