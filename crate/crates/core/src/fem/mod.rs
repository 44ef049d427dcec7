//! Reference-element machinery for P1 Lagrange elements on simplices.

mod basis;
mod cellmap;
mod quadrature;

pub use basis::{eval_p1, P1Eval};
pub use cellmap::CellMap;
pub use quadrature::{facet_quadrature, quadrature, QuadratureRule};

/// Default quadrature degree for load vectors and error integrals on a
/// simplex of dimension `simplex_dim`.
pub fn error_quadrature_degree(simplex_dim: usize) -> usize {
    if simplex_dim == 2 {
        5
    } else {
        4
    }
}
