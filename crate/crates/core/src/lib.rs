//! Space-time finite elements for the parabolic problem
//! `∂_t u − ∇·(A∇u) = f` posed on the space-time cylinder `Ω × (0, T)`.
//!
//! Time is treated as one more coordinate: the cylinder is triangulated as a
//! single `(d+1)`-dimensional simplicial mesh, continuous piecewise-linear
//! trial functions vanishing on the lateral boundary and at `t = 0` are used
//! for both trial and test space, and the resulting nonsymmetric sparse
//! system is solved in one shot.
//!
//! Module map:
//!
//! * [`mesh`]: structured simplicial meshes of the cylinder with tagged boundary facets.
//! * [`fem`]: P1 reference basis, quadrature, affine cell maps.
//! * [`assembly`]: dof maps, the space-time system, mass and spatial stiffness matrices.
//! * [`linsolve`]: sparse LU / Cholesky, restarted GMRES with ILU(0).
//! * [`norms`]: error functionals, `L²` projection, the mesh-dependent norm and the inf-sup ratio.
//! * [`manufactured`]: closed-form test solutions.
//! * [`experiments`]: refinement sweeps, tables, plot data and VTK output.

#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod linsolve;
pub mod manufactured;
pub mod mesh;
pub mod norms;
pub mod sparse;

pub use error::{Error, Result};
