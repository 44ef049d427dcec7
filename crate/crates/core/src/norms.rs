//! Error functionals, the `L²` projection onto the discrete space, the
//! mesh-dependent norm `‖y‖_h² = ‖y‖_V² + ‖q_h(y)‖_V²` and the discrete
//! inf-sup ratio.

use crate::assembly::{
    assemble_mass_on, assemble_spatial_stiffness, assemble_time_derivative, cell_map, CoefficientField, DofMap,
};
use crate::error::{Error, Result};
use crate::fem::{error_quadrature_degree, eval_p1, facet_quadrature, quadrature, CellMap, QuadratureRule};
use crate::linsolve::{Solver, SolverConfig};
use crate::manufactured::{ExactField, Zero};
use crate::mesh::{BoundaryTag, SpaceTimeMesh};
use crate::sparse::dot;

/// A P1 function on the mesh given by its values at all vertices.
#[derive(Debug, Clone)]
pub struct DiscreteField<'m> {
    mesh: &'m SpaceTimeMesh,
    values: Vec<f64>,
}

impl<'m> DiscreteField<'m> {
    pub fn new(mesh: &'m SpaceTimeMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, mesh has {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite field value at node {k}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zero(mesh: &'m SpaceTimeMesh) -> Self {
        Self { mesh, values: vec![0.0; mesh.n_vertices()] }
    }

    /// Field with free values `free` and the prescribed values of `dofmap`
    /// on constrained nodes.
    pub fn from_free(mesh: &'m SpaceTimeMesh, dofmap: &DofMap, free: &[f64]) -> Result<Self> {
        Self::new(mesh, dofmap.expand(free))
    }

    /// Nodal interpolant of `exact`.
    pub fn interpolate(mesh: &'m SpaceTimeMesh, exact: &dyn ExactField) -> Self {
        let values = (0..mesh.n_vertices()).map(|v| exact.value(mesh.vertex(v))).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &'m SpaceTimeMesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn local(&self, c: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, &v) in out.iter_mut().zip(self.mesh.cell(c)) {
            *o = self.values[v];
        }
        out
    }
}

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub err_l2_terminal: f64,
    pub err_l2_cylinder: f64,
    pub err_h1_cylinder: f64,
    pub err_hnorm: Option<f64>,
}

/// Gram determinant square root of the edge vectors of a facet, i.e. the
/// ratio of facet measure to reference measure.
fn facet_scale(points: &[&[f64]]) -> f64 {
    let m = points[0].len();
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| (0..m).map(|r| p[r] - points[0][r]).collect()).collect();
    match edges.len() {
        1 => dot(&edges[0], &edges[0]).sqrt(),
        2 => {
            let (a, b, c) = (dot(&edges[0], &edges[0]), dot(&edges[0], &edges[1]), dot(&edges[1], &edges[1]));
            (a * c - b * b).max(0.0).sqrt()
        }
        k => unreachable!("facets of {k} edges"),
    }
}

/// `‖(u − u_h)(·, T)‖_{L²(Ω)}` over the Terminal facets.
pub fn l2_error_terminal(field: &DiscreteField, exact: &dyn ExactField) -> Result<f64> {
    let mesh = field.mesh;
    let m = mesh.simplex_dim();
    let rule = facet_quadrature(m)?;
    let mut total = 0.0;
    let mut found = false;
    let mut x = [0.0; 3];
    for (facet, tag) in mesh.boundary_facets() {
        if tag != BoundaryTag::Terminal {
            continue;
        }
        found = true;
        let points: Vec<&[f64]> = facet.iter().map(|&v| mesh.vertex(v)).collect();
        let scale = facet_scale(&points);
        for (xi, w) in rule.iter() {
            let mut lambda = [0.0; 3];
            lambda[0] = 1.0 - xi.iter().sum::<f64>();
            lambda[1..m].copy_from_slice(xi);
            x.iter_mut().for_each(|c| *c = 0.0);
            let mut uh = 0.0;
            for (k, (&v, p)) in facet.iter().zip(&points).enumerate() {
                uh += lambda[k] * field.values[v];
                for r in 0..m {
                    x[r] += lambda[k] * p[r];
                }
            }
            let e = exact.value(&x[..m]) - uh;
            total += w * scale * e * e;
        }
    }
    if !found {
        return Err(Error::InvalidMesh("mesh has no terminal facets".into()));
    }
    Ok(total.sqrt())
}

/// Squared `L²(Ω_T)` error and squared error of the space-time gradient.
fn cylinder_error_squares(field: &DiscreteField, exact: &dyn ExactField) -> Result<(f64, f64)> {
    let mesh = field.mesh;
    let m = mesh.simplex_dim();
    let rule = quadrature(m, error_quadrature_degree(m))?;
    let (mut l2, mut grad) = (0.0, 0.0);
    let mut x = [0.0; 3];
    let mut g = [0.0; 3];
    for c in 0..mesh.n_cells() {
        let map = cell_map(mesh, c)?;
        let coeffs = field.local(c);
        let grad_h = p1_gradient(&map, &coeffs);
        for (xi, w) in rule.iter() {
            map.map_point(xi, &mut x[..m]);
            let phi = eval_p1(m, xi).values;
            let uh: f64 = (0..=m).map(|k| phi[k] * coeffs[k]).sum();
            exact.gradient(&x[..m], &mut g[..m]);
            let e = exact.value(&x[..m]) - uh;
            let ge: f64 = (0..m).map(|r| (g[r] - grad_h[r]).powi(2)).sum();
            let wd = w * map.abs_det();
            l2 += wd * e * e;
            grad += wd * ge;
        }
    }
    Ok((l2, grad))
}

fn p1_gradient(map: &CellMap, coeffs: &[f64; 4]) -> [f64; 3] {
    let grads = map.p1_gradients();
    let mut out = [0.0; 3];
    for k in 0..=map.dim {
        for r in 0..map.dim {
            out[r] += coeffs[k] * grads[k][r];
        }
    }
    out
}

/// `‖u − u_h‖_{L²(Ω_T)}`.
pub fn l2_error_cylinder(field: &DiscreteField, exact: &dyn ExactField) -> Result<f64> {
    Ok(cylinder_error_squares(field, exact)?.0.sqrt())
}

/// `‖D(u − u_h)‖_{L²(Ω_T)}` with `D` the space-time gradient.
pub fn gradient_error_cylinder(field: &DiscreteField, exact: &dyn ExactField) -> Result<f64> {
    Ok(cylinder_error_squares(field, exact)?.1.sqrt())
}

/// `‖u − u_h‖_{H¹(Ω_T)}` including the time derivative.
pub fn h1_error_cylinder(field: &DiscreteField, exact: &dyn ExactField) -> Result<f64> {
    let (l2, grad) = cylinder_error_squares(field, exact)?;
    Ok((l2 + grad).sqrt())
}

/// `‖u − u_h‖_V = (∫∫ (A∇_x e)·∇_x e)^{1/2}`.
pub fn v_norm_error(field: &DiscreteField, exact: &dyn ExactField, a: &CoefficientField) -> Result<f64> {
    let mesh = field.mesh;
    let m = mesh.simplex_dim();
    let d = m - 1;
    let rule = quadrature(m, error_quadrature_degree(m))?;
    let mut total = 0.0;
    let mut x = [0.0; 3];
    let mut g = [0.0; 3];
    for c in 0..mesh.n_cells() {
        let map = cell_map(mesh, c)?;
        let grad_h = p1_gradient(&map, &field.local(c));
        for (xi, w) in rule.iter() {
            map.map_point(xi, &mut x[..m]);
            exact.gradient(&x[..m], &mut g[..m]);
            let e: Vec<f64> = (0..d).map(|r| g[r] - grad_h[r]).collect();
            let coef = a.eval(&x[..m]);
            let mut q = 0.0;
            for r in 0..d {
                for s in 0..d {
                    q += coef[r][s] * e[s] * e[r];
                }
            }
            total += w * map.abs_det() * q;
        }
    }
    Ok(total.max(0.0).sqrt())
}

/// `‖u_h‖_V` of a discrete field.
pub fn v_norm(field: &DiscreteField, a: &CoefficientField) -> Result<f64> {
    v_norm_error(field, &Zero, a)
}

/// Right-hand side `∫∫ (∂_t u − ∂_t u_h) φ_i` over the free dofs.
fn time_derivative_load(field: &DiscreteField, exact: &dyn ExactField, dofmap: &DofMap) -> Result<Vec<f64>> {
    let mesh = field.mesh;
    let m = mesh.simplex_dim();
    let rule = quadrature(m, error_quadrature_degree(m))?;
    let mut rhs = vec![0.0; dofmap.n_free()];
    let mut x = [0.0; 3];
    let mut g = [0.0; 3];
    for c in 0..mesh.n_cells() {
        let map = cell_map(mesh, c)?;
        let dt_h = p1_gradient(&map, &field.local(c))[m - 1];
        let cell = mesh.cell(c);
        for (xi, w) in rule.iter() {
            map.map_point(xi, &mut x[..m]);
            exact.gradient(&x[..m], &mut g[..m]);
            let phi = eval_p1(m, xi).values;
            let wd = w * map.abs_det() * (g[m - 1] - dt_h);
            for (k, &v) in cell.iter().enumerate() {
                if let Some(i) = dofmap.free_index(v) {
                    rhs[i] += wd * phi[k];
                }
            }
        }
    }
    Ok(rhs)
}

/// `q_h(u − u_h)`: the discrete function with zero Dirichlet data solving
/// `∫∫ (A∇_x q_h)·∇_x φ = ∫∫ ∂_t(u − u_h) φ` for all free basis functions.
pub fn q_h<'m>(
    field: &DiscreteField<'m>,
    exact: &dyn ExactField,
    dofmap: &DofMap,
    a: &CoefficientField,
    config: &SolverConfig,
) -> Result<DiscreteField<'m>> {
    let homogeneous = DofMap::homogeneous(field.mesh);
    let stiffness = assemble_spatial_stiffness(field.mesh, &homogeneous, a)?;
    let rhs = time_derivative_load(field, exact, dofmap)?;
    let q = Solver::new_spd(&stiffness, config)?.solve(&rhs)?;
    DiscreteField::from_free(field.mesh, &homogeneous, &q)
}

/// `‖u − u_h‖_h = (‖u − u_h‖_V² + ‖q_h(u − u_h)‖_V²)^{1/2}`.
pub fn h_norm_error(
    field: &DiscreteField,
    exact: &dyn ExactField,
    dofmap: &DofMap,
    a: &CoefficientField,
    config: &SolverConfig,
) -> Result<f64> {
    let v = v_norm_error(field, exact, a)?;
    let q = v_norm(&q_h(field, exact, dofmap, a, config)?, a)?;
    Ok(v.hypot(q))
}

/// Load vector `∫∫ y φ_i` over the free dofs by quadrature.
fn projection_load(mesh: &SpaceTimeMesh, dofmap: &DofMap, target: &dyn ExactField, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let m = mesh.simplex_dim();
    let mut rhs = vec![0.0; dofmap.n_free()];
    let mut x = [0.0; 3];
    for c in 0..mesh.n_cells() {
        let map = cell_map(mesh, c)?;
        let cell = mesh.cell(c);
        for (xi, w) in rule.iter() {
            map.map_point(xi, &mut x[..m]);
            let phi = eval_p1(m, xi).values;
            let wy = w * map.abs_det() * target.value(&x[..m]);
            for (k, &v) in cell.iter().enumerate() {
                if let Some(i) = dofmap.free_index(v) {
                    rhs[i] += wy * phi[k];
                }
            }
        }
    }
    Ok(rhs)
}

/// `L²(Ω_T)` projection onto the discrete space with zero lateral and initial
/// values.
pub fn l2_project<'m>(
    mesh: &'m SpaceTimeMesh,
    target: &dyn ExactField,
    config: &SolverConfig,
) -> Result<DiscreteField<'m>> {
    let m = mesh.simplex_dim();
    let dofmap = DofMap::homogeneous(mesh);
    let degree = error_quadrature_degree(m);
    let mass = assemble_mass_on(mesh, &dofmap, degree)?;
    let rule = quadrature(m, degree)?;
    let rhs = projection_load(mesh, &dofmap, target, &rule)?;
    let c = Solver::new_spd(&mass, config)?.solve(&rhs)?;
    DiscreteField::from_free(mesh, &dofmap, &c)
}

/// Evaluates `sup_v a(u_h, v)/‖v‖_V` divided by `‖u_h‖_h` for fields of the
/// discrete space, reusing one factorization of the spatial stiffness.
pub struct InfSupEvaluator {
    stiffness: Solver<'static>,
    time_derivative: crate::sparse::CsrMatrix,
}

impl InfSupEvaluator {
    pub fn new(mesh: &SpaceTimeMesh, a: &CoefficientField, config: &SolverConfig) -> Result<Self> {
        let dofmap = DofMap::homogeneous(mesh);
        let stiffness = assemble_spatial_stiffness(mesh, &dofmap, a)?;
        let time_derivative = assemble_time_derivative(mesh, &dofmap)?;
        Ok(Self { stiffness: Solver::owned_spd(stiffness, config)?, time_derivative })
    }

    pub fn n_free(&self) -> usize {
        self.time_derivative.nrows()
    }

    /// Ratio for free-dof coefficients `c`.
    pub fn ratio(&self, c: &[f64]) -> Result<f64> {
        if c.len() != self.n_free() {
            return Err(Error::InvalidArgument(format!("expected {} coefficients, got {}", self.n_free(), c.len())));
        }
        let k = self.stiffness.matrix();
        let kc = k.mul_vec(c);
        let cc = self.time_derivative.mul_vec(c);
        let r: Vec<f64> = kc.iter().zip(&cc).map(|(a, b)| a + b).collect();
        let sup2 = dot(&r, &self.stiffness.solve(&r)?);
        let q2 = dot(&cc, &self.stiffness.solve(&cc)?);
        let h2 = dot(c, &kc) + q2;
        if h2.is_nan() || h2 <= 0.0 {
            return Err(Error::UndefinedRatio);
        }
        Ok((sup2 / h2).sqrt())
    }
}

/// One-shot inf-sup ratio for free-dof coefficients `c`.
pub fn infsup_ratio(mesh: &SpaceTimeMesh, a: &CoefficientField, c: &[f64], config: &SolverConfig) -> Result<f64> {
    InfSupEvaluator::new(mesh, a, config)?.ratio(c)
}

/// `log₂(e_coarse / e_fine)`.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) || !e_coarse.is_finite() || !e_fine.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "convergence order needs positive errors, got {e_coarse:e} and {e_fine:e}"
        )));
    }
    Ok((e_coarse / e_fine).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_mass;
    use crate::manufactured::{affine, example, Analytic};
    use crate::mesh::Geometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn orders() {
        assert!((convergence_order(9.969e-2, 3.089e-2).unwrap() - 1.690).abs() < 5e-4);
        assert!((convergence_order(2.164e-1, 4.630e-2).unwrap() - 2.225).abs() < 5e-4);
        assert_eq!(convergence_order(4e-2, 1e-2).unwrap(), 2.0);
        assert!(convergence_order(0.0, 1.0).is_err());
        assert!(convergence_order(1.0, -1.0).is_err());
    }

    #[test]
    fn affine_interpolant_has_zero_error() {
        let exact = affine();
        for geometry in [Geometry::UnitSquare, Geometry::Trapezoid] {
            let mesh = SpaceTimeMesh::build(4, geometry).unwrap();
            let field = DiscreteField::interpolate(&mesh, &exact);
            assert!(l2_error_terminal(&field, &exact).unwrap() < 1e-13);
            assert!(l2_error_cylinder(&field, &exact).unwrap() < 1e-12);
            assert!(h1_error_cylinder(&field, &exact).unwrap() < 1e-12);
        }
        let exact3 = Analytic {
            value: |p: &[f64]| p[0] - 2.0 * p[1] + 0.5 * p[2],
            gradient: |_: &[f64], g: &mut [f64]| g.copy_from_slice(&[1.0, -2.0, 0.5]),
        };
        let mesh = SpaceTimeMesh::build(3, Geometry::UnitCube).unwrap();
        let field = DiscreteField::interpolate(&mesh, &exact3);
        assert!(l2_error_terminal(&field, &exact3).unwrap() < 1e-13);
        assert!(h1_error_cylinder(&field, &exact3).unwrap() < 1e-12);
    }

    #[test]
    fn constant_offset() {
        let mesh = SpaceTimeMesh::build(4, Geometry::UnitSquare).unwrap();
        let field = DiscreteField::new(&mesh, vec![0.25; mesh.n_vertices()]).unwrap();
        assert!((l2_error_cylinder(&field, &Zero).unwrap() - 0.25).abs() < 1e-14);
        assert!((l2_error_terminal(&field, &Zero).unwrap() - 0.25).abs() < 1e-14);
        assert!(v_norm(&field, &CoefficientField::identity(1)).unwrap() < 1e-14);
    }

    #[test]
    fn v_norm_of_x() {
        let mesh = SpaceTimeMesh::build(4, Geometry::UnitSquare).unwrap();
        let x = Analytic { value: |p: &[f64]| p[0], gradient: |_: &[f64], g: &mut [f64]| g.copy_from_slice(&[1.0, 0.0]) };
        let field = DiscreteField::interpolate(&mesh, &x);
        assert!((v_norm(&field, &CoefficientField::identity(1)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn example2_terminal_error_is_terminal_norm() {
        let mesh = SpaceTimeMesh::build(2, Geometry::UnitCube).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values = (0..mesh.n_vertices()).map(|_| rng.gen::<f64>()).collect();
        let field = DiscreteField::new(&mesh, values).unwrap();
        let a = l2_error_terminal(&field, &example(2).unwrap()).unwrap();
        let b = l2_error_terminal(&field, &Zero).unwrap();
        assert!((a - b).abs() < 1e-14 * b);
    }

    #[test]
    fn quadratic_form_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, geometry) in [(4, Geometry::UnitSquare), (3, Geometry::Trapezoid), (2, Geometry::UnitCube)] {
            let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
            let a = CoefficientField::identity(geometry.spatial_dim());
            let mass = assemble_mass(&mesh, 2).unwrap();
            let stiffness = assemble_spatial_stiffness(&mesh, &DofMap::all_free(mesh.n_vertices()), &a).unwrap();
            for _ in 0..10 {
                let c: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let field = DiscreteField::new(&mesh, c.clone()).unwrap();
                let l2 = l2_error_cylinder(&field, &Zero).unwrap().powi(2);
                let cm = mass.bilinear(&c, &c);
                assert!((l2 - cm).abs() <= 1e-11 * cm);
                let v = v_norm(&field, &a).unwrap().powi(2);
                let ck = stiffness.bilinear(&c, &c);
                assert!((v - ck).abs() <= 1e-11 * ck);
            }
        }
    }

    #[test]
    fn q_h_vanishes_for_exact_time_derivative() {
        let mesh = SpaceTimeMesh::build(4, Geometry::UnitSquare).unwrap();
        let exact = affine();
        let field = DiscreteField::interpolate(&mesh, &exact);
        let dofmap = DofMap::with_dirichlet(&mesh, |p| exact.value(p)).unwrap();
        let a = CoefficientField::identity(1);
        let q = q_h(&field, &exact, &dofmap, &a, &config()).unwrap();
        assert!(q.values().iter().all(|v| v.abs() < 1e-13));
        let zero = DiscreteField::zero(&mesh);
        let q = q_h(&zero, &Zero, &DofMap::homogeneous(&mesh), &a, &config()).unwrap();
        assert!(q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_reproduces_discrete_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, geometry) in [(4, Geometry::UnitSquare), (4, Geometry::Trapezoid), (2, Geometry::UnitCube)] {
            let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
            let dofmap = DofMap::homogeneous(&mesh);
            let c: Vec<f64> = (0..dofmap.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let field = DiscreteField::from_free(&mesh, &dofmap, &c).unwrap();
            let target = PiecewiseLinear(&field);
            let projected = l2_project(&mesh, &target, &config()).unwrap();
            for (a, b) in projected.values().iter().zip(field.values()) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    /// Evaluates a discrete field at arbitrary points by locating the cell.
    struct PiecewiseLinear<'a, 'm>(&'a DiscreteField<'m>);

    impl ExactField for PiecewiseLinear<'_, '_> {
        fn value(&self, p: &[f64]) -> f64 {
            let mesh = self.0.mesh();
            let m = mesh.simplex_dim();
            for c in 0..mesh.n_cells() {
                let map = cell_map(mesh, c).unwrap();
                // barycentric coordinates via J⁻¹ (x − x₀)
                let mut xi = [0.0; 3];
                for k in 0..m {
                    xi[k] = (0..m).map(|r| map.inv_transpose[r][k] * (p[r] - map.origin[r])).sum();
                }
                let phi = eval_p1(m, &xi[..m]).values;
                if phi[..=m].iter().all(|&l| l >= -1e-12) {
                    return (0..=m).map(|k| phi[k] * self.0.values()[mesh.cell(c)[k]]).sum();
                }
            }
            panic!("point {p:?} outside the mesh");
        }

        fn gradient(&self, _: &[f64], _: &mut [f64]) {
            unimplemented!()
        }
    }

    #[test]
    fn infsup_lower_bound_on_small_meshes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, geometry) in [(2, Geometry::UnitSquare), (4, Geometry::Trapezoid), (2, Geometry::UnitCube)] {
            let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
            let eval = InfSupEvaluator::new(&mesh, &CoefficientField::identity(geometry.spatial_dim()), &config()).unwrap();
            for _ in 0..20 {
                let c: Vec<f64> = (0..eval.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ratio = eval.ratio(&c).unwrap();
                assert!(ratio >= 1.0 / 8f64.sqrt() - 1e-10, "{ratio}");
            }
            assert!(matches!(eval.ratio(&vec![0.0; eval.n_free()]), Err(Error::UndefinedRatio)));
        }
    }
}
