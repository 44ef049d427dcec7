//! Closed-form solutions with matching source terms.
//!
//! Points are space-time coordinates `[x, t]` or `[x, y, t]`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::CoefficientField;
use crate::error::{Error, Result};
use crate::mesh::Geometry;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

/// A function of the space-time point together with its space-time gradient.
pub trait ExactField {
    fn value(&self, point: &[f64]) -> f64;
    /// Spatial gradient followed by the time derivative.
    fn gradient(&self, point: &[f64], out: &mut [f64]);
}

/// Which parts of the Dirichlet data vanish identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Homogeneity {
    pub initial: bool,
    pub lateral: bool,
    pub terminal: bool,
}

/// Exact solution, its derivatives, the matching source and the domain.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub name: String,
    pub geometry: Geometry,
    pub coefficient: CoefficientField,
    pub u: ScalarFn,
    pub dt_u: ScalarFn,
    pub grad_x_u: GradientFn,
    /// `Δ_x u`, when known in closed form.
    pub laplacian_x_u: Option<ScalarFn>,
    pub f: ScalarFn,
    pub homogeneity: Homogeneity,
}

impl std::fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("name", &self.name)
            .field("geometry", &self.geometry)
            .field("homogeneity", &self.homogeneity)
            .finish()
    }
}

impl ExactField for ManufacturedSolution {
    fn value(&self, point: &[f64]) -> f64 {
        (self.u)(point)
    }

    fn gradient(&self, point: &[f64], out: &mut [f64]) {
        let d = self.geometry.spatial_dim();
        let g = (self.grad_x_u)(point);
        out[..d].copy_from_slice(&g[..d]);
        out[d] = (self.dt_u)(point);
    }
}

/// A space-time function given by value and gradient callbacks.
pub struct Analytic<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ExactField for Analytic<V, G>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn value(&self, point: &[f64]) -> f64 {
        (self.value)(point)
    }

    fn gradient(&self, point: &[f64], out: &mut [f64]) {
        (self.gradient)(point, out)
    }
}

/// The zero function.
pub struct Zero;

impl ExactField for Zero {
    fn value(&self, _: &[f64]) -> f64 {
        0.0
    }

    fn gradient(&self, _: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// `(2π² + 1)/(2π² + 2)`, the quadratic coefficient of example 3.
pub const EXAMPLE3_C: f64 = 0.954_000_165_824_812_4;

fn scalar(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

fn gradient(f: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static) -> GradientFn {
    Arc::new(f)
}

fn sin_pi(x: f64) -> f64 {
    (PI * x).sin()
}

fn cos_pi(x: f64) -> f64 {
    (PI * x).cos()
}

fn example1() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "example 1".into(),
        geometry: Geometry::UnitSquare,
        coefficient: CoefficientField::identity(1),
        u: scalar(|p| sin_pi(p[0]) * cos_pi(p[1])),
        dt_u: scalar(|p| -PI * sin_pi(p[0]) * sin_pi(p[1])),
        grad_x_u: gradient(|p| [PI * cos_pi(p[0]) * cos_pi(p[1]), 0.0]),
        laplacian_x_u: Some(scalar(|p| -PI * PI * sin_pi(p[0]) * cos_pi(p[1]))),
        f: scalar(|p| -PI * sin_pi(p[0]) * sin_pi(p[1]) + PI * PI * sin_pi(p[0]) * cos_pi(p[1])),
        homogeneity: Homogeneity { initial: false, lateral: true, terminal: false },
    }
}

fn example2() -> ManufacturedSolution {
    let s = |p: &[f64]| sin_pi(p[0]) * sin_pi(p[1]);
    ManufacturedSolution {
        name: "example 2".into(),
        geometry: Geometry::UnitCube,
        coefficient: CoefficientField::identity(2),
        u: scalar(move |p| s(p) * sin_pi(p[2])),
        dt_u: scalar(move |p| PI * s(p) * cos_pi(p[2])),
        grad_x_u: gradient(|p| {
            let st = sin_pi(p[2]);
            [PI * cos_pi(p[0]) * sin_pi(p[1]) * st, PI * sin_pi(p[0]) * cos_pi(p[1]) * st]
        }),
        laplacian_x_u: Some(scalar(move |p| -2.0 * PI * PI * s(p) * sin_pi(p[2]))),
        f: scalar(move |p| s(p) * (PI * cos_pi(p[2]) + 2.0 * PI * PI * sin_pi(p[2]))),
        homogeneity: Homogeneity { initial: true, lateral: true, terminal: true },
    }
}

fn example3() -> ManufacturedSolution {
    let s = |p: &[f64]| sin_pi(p[0]) * sin_pi(p[1]);
    let g = |t: f64| -EXAMPLE3_C * t * t + t;
    let dg = |t: f64| -2.0 * EXAMPLE3_C * t + 1.0;
    ManufacturedSolution {
        name: "example 3".into(),
        geometry: Geometry::UnitCube,
        coefficient: CoefficientField::identity(2),
        u: scalar(move |p| s(p) * g(p[2])),
        dt_u: scalar(move |p| s(p) * dg(p[2])),
        grad_x_u: gradient(move |p| {
            let gt = g(p[2]);
            [PI * cos_pi(p[0]) * sin_pi(p[1]) * gt, PI * sin_pi(p[0]) * cos_pi(p[1]) * gt]
        }),
        laplacian_x_u: Some(scalar(move |p| -2.0 * PI * PI * s(p) * g(p[2]))),
        f: scalar(move |p| s(p) * (dg(p[2]) + 2.0 * PI * PI * g(p[2]))),
        homogeneity: Homogeneity { initial: true, lateral: true, terminal: false },
    }
}

fn example4() -> ManufacturedSolution {
    // u = sin(πx) t e^{2t}
    let w = |t: f64| t * (2.0 * t).exp();
    let dw = |t: f64| (1.0 + 2.0 * t) * (2.0 * t).exp();
    ManufacturedSolution {
        name: "example 4".into(),
        geometry: Geometry::Trapezoid,
        coefficient: CoefficientField::identity(1),
        u: scalar(move |p| sin_pi(p[0]) * w(p[1])),
        dt_u: scalar(move |p| sin_pi(p[0]) * dw(p[1])),
        grad_x_u: gradient(move |p| [PI * cos_pi(p[0]) * w(p[1]), 0.0]),
        laplacian_x_u: Some(scalar(move |p| -PI * PI * sin_pi(p[0]) * w(p[1]))),
        f: scalar(move |p| sin_pi(p[0]) * (dw(p[1]) + PI * PI * w(p[1]))),
        homogeneity: Homogeneity { initial: true, lateral: false, terminal: false },
    }
}

/// One of the four registered experiments.
pub fn example(id: u32) -> Result<ManufacturedSolution> {
    match id {
        1 => Ok(example1()),
        2 => Ok(example2()),
        3 => Ok(example3()),
        4 => Ok(example4()),
        _ => Err(Error::InvalidArgument(format!("unknown example {id} (expected 1 to 4)"))),
    }
}

/// `u = x + t` on the unit square, with `f = 1`. Reproduced exactly by P1.
pub fn affine() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "affine".into(),
        geometry: Geometry::UnitSquare,
        coefficient: CoefficientField::identity(1),
        u: scalar(|p| p[0] + p[1]),
        dt_u: scalar(|_| 1.0),
        grad_x_u: gradient(|_| [1.0, 0.0]),
        laplacian_x_u: Some(scalar(|_| 0.0)),
        f: scalar(|_| 1.0),
        homogeneity: Homogeneity { initial: false, lateral: false, terminal: false },
    }
}

/// Finite-difference step of the residual oracle, a power of two near 1e−3.
pub const FD_STEP: f64 = 1.0 / 1024.0;
// sample coordinates are snapped to this dyadic grid so that p ± k·FD_STEP is exact
const SAMPLE_GRID: f64 = 1.0 / 1_048_576.0;

/// Fourth-order central differences of `u` along coordinate `axis`:
/// first and second derivative.
fn central_differences(u: &ScalarFn, point: &[f64], axis: usize) -> (f64, f64) {
    let h = FD_STEP;
    let mut p = point.to_vec();
    let mut at = |k: f64| {
        p[axis] = point[axis] + k * h;
        u(&p)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0), at(-1.0), at(0.0), at(1.0), at(2.0));
    let first = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let second = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (first, second)
}

/// Uniform random points in the interior of the domain, snapped to a dyadic grid.
pub fn interior_samples(geometry: Geometry, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = geometry.spatial_dim() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            let reference: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.99)).collect();
            let mut p = vec![0.0; m];
            geometry.map_reference(&reference, &mut p);
            p.iter_mut().for_each(|c| *c = (*c / SAMPLE_GRID).round() * SAMPLE_GRID);
            p
        })
        .collect()
}

/// Largest `|∂_t u − Δ_x u − f|` over random interior points, with both
/// derivatives of `u` taken by finite differences of the `u` callback.
pub fn pde_residual_check(sol: &ManufacturedSolution, n_samples: usize, seed: u64) -> Result<f64> {
    if !sol.coefficient.is_identity() {
        return Err(Error::InvalidArgument("residual oracle requires the identity coefficient".into()));
    }
    let d = sol.geometry.spatial_dim();
    let mut worst: f64 = 0.0;
    for p in interior_samples(sol.geometry, n_samples, seed) {
        let (dt, _) = central_differences(&sol.u, &p, d);
        let laplacian: f64 = (0..d).map(|k| central_differences(&sol.u, &p, k).1).sum();
        worst = worst.max((dt - laplacian - (sol.f)(&p)).abs());
    }
    Ok(worst)
}
