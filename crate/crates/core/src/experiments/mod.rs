//! Refinement sweeps over the registered examples and their outputs.

mod config;
mod output;

pub use config::{parse_levels, Format, RunConfig};
pub use output::{emit_solution_vtk, emit_table, render_csv, render_markdown, render_plotdata};

use std::time::Instant;

use crate::assembly::{assemble_system, DofMap};
use crate::error::{Error, Result};
use crate::fem::error_quadrature_degree;
use crate::linsolve::solve;
use crate::manufactured::{example, ManufacturedSolution};
use crate::mesh::SpaceTimeMesh;
use crate::norms::{
    convergence_order, h1_error_cylinder, h_norm_error, l2_error_cylinder, l2_error_terminal, DiscreteField,
    ErrorReport,
};

/// Orders between a row and the preceding (coarser) row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orders {
    pub l2_terminal: f64,
    pub l2_cylinder: f64,
    pub h1_cylinder: f64,
    pub hnorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub report: ErrorReport,
    /// `None` on the first row.
    pub orders: Option<Orders>,
}

/// Errors and orders of a sweep, coarsest level first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub example: u32,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn new(example: u32) -> Self {
        Self { example, rows: Vec::new() }
    }

    pub fn has_hnorm(&self) -> bool {
        self.rows.first().is_some_and(|r| r.report.err_hnorm.is_some())
    }

    /// Appends a level and computes its orders against the previous row.
    pub fn push(&mut self, report: ErrorReport) -> Result<()> {
        let orders = match self.rows.last() {
            None => None,
            Some(prev) => {
                let p = &prev.report;
                if report.h >= p.h {
                    return Err(Error::InvalidArgument("table rows must have decreasing h".into()));
                }
                let hnorm = match (p.err_hnorm, report.err_hnorm) {
                    (Some(a), Some(b)) => Some(convergence_order(a, b)?),
                    _ => None,
                };
                Some(Orders {
                    l2_terminal: convergence_order(p.err_l2_terminal, report.err_l2_terminal)?,
                    l2_cylinder: convergence_order(p.err_l2_cylinder, report.err_l2_cylinder)?,
                    h1_cylinder: convergence_order(p.err_h1_cylinder, report.err_h1_cylinder)?,
                    hnorm,
                })
            }
        };
        self.rows.push(TableRow { report, orders });
        Ok(())
    }

    /// Orders of the finest pair of levels.
    pub fn finest_orders(&self) -> Option<Orders> {
        self.rows.last().and_then(|r| r.orders)
    }
}

/// Discrete solution of one example on one mesh.
pub struct LevelSolution<'m> {
    pub field: DiscreteField<'m>,
    pub dofmap: DofMap,
}

/// Assembles and solves the space-time system for `sol` on `mesh`.
pub fn solve_level<'m>(
    mesh: &'m SpaceTimeMesh,
    sol: &ManufacturedSolution,
    config: &RunConfig,
) -> Result<LevelSolution<'m>> {
    let dofmap = DofMap::with_dirichlet(mesh, |p| (sol.u)(p))?;
    let f = |p: &[f64]| (sol.f)(p);
    let system = assemble_system(mesh, &dofmap, &sol.coefficient, &f, error_quadrature_degree(mesh.simplex_dim()))?;
    if let (true, Some(dir)) = (config.dump_matrices, &config.out_dir) {
        system
            .matrix
            .write_matrix_market(&dir.join(format!("matrix_N{}.mtx", mesh.subdivisions())))?;
    }
    let free = solve(&system, &config.solver)?;
    let field = DiscreteField::from_free(mesh, &dofmap, &free)?;
    Ok(LevelSolution { field, dofmap })
}

/// Error report of a discrete solution.
pub fn evaluate(level: &LevelSolution, sol: &ManufacturedSolution, config: &RunConfig) -> Result<ErrorReport> {
    let n = level.field.mesh().subdivisions();
    let err_hnorm = if config.include_hnorm {
        Some(h_norm_error(&level.field, sol, &level.dofmap, &sol.coefficient, &config.solver)?)
    } else {
        None
    };
    Ok(ErrorReport {
        n,
        h: 1.0 / n as f64,
        err_l2_terminal: l2_error_terminal(&level.field, sol)?,
        err_l2_cylinder: l2_error_cylinder(&level.field, sol)?,
        err_h1_cylinder: h1_error_cylinder(&level.field, sol)?,
        err_hnorm,
    })
}

/// Runs the sweep, writing the requested formats to the output directory.
pub fn run(config: &RunConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let sol = example(config.example)?;
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut table = ConvergenceTable::new(config.example);
    for level in config.l_min..=config.l_max {
        let n = 1usize << level;
        let start = Instant::now();
        let result = SpaceTimeMesh::build(n, sol.geometry).and_then(|mesh| {
            let solution = solve_level(&mesh, &sol, config)?;
            let report = evaluate(&solution, &sol, config)?;
            if level == config.l_max && config.formats.contains(&Format::Vtk) {
                if let Some(dir) = &config.out_dir {
                    emit_solution_vtk(&mesh, &solution.field, &dir.join(format!("solution_N{n}.vtk")))?;
                }
            }
            log::info!(
                "example {} N={n}: {} free dofs, geometric h {:.4e}, {:.2} s",
                config.example,
                solution.dofmap.n_free(),
                mesh.h(),
                start.elapsed().as_secs_f64()
            );
            Ok(report)
        });
        let report = result.inspect_err(|e| log::error!("example {} N={n} failed: {e}", config.example))?;
        table.push(report)?;
    }
    if let Some(dir) = &config.out_dir {
        for &format in &config.formats {
            if format != Format::Vtk {
                emit_table(&table, format, dir)?;
            }
        }
    }
    Ok(table)
}
