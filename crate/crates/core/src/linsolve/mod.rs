//! Sparse linear solvers: direct LU and restarted GMRES for the
//! nonsymmetric space-time system, Cholesky for the SPD auxiliary systems.

mod direct;
mod gmres;
mod ilu;

pub use direct::{symmetric_fill_estimate, DirectLu, SparseCholesky};
pub use ilu::Ilu0;

use std::borrow::Cow;

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};
use crate::sparse::{norm2, CsrMatrix};

/// Default ceiling on the estimated size of a direct factorization.
pub const DEFAULT_MEMORY_BUDGET: usize = 3 << 30;

// bytes per entry of the symmetric-pattern Cholesky estimate for L+U
const LU_BYTES_PER_FILL_ENTRY: usize = 64;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DirectLu,
    Gmres,
    /// Direct LU when its estimated footprint fits the memory budget,
    /// otherwise GMRES with ILU(0).
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lu" => Ok(Self::DirectLu),
            "gmres" => Ok(Self::Gmres),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}' (expected lu, gmres or auto)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Ilu0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    pub preconditioner: Preconditioner,
    pub memory_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::DirectLu,
            tolerance: 1e-10,
            max_iterations: 20_000,
            restart: 50,
            preconditioner: Preconditioner::Ilu0,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!("solver tolerance {} not in (0, 1)", self.tolerance)));
        }
        if self.restart == 0 {
            return Err(Error::InvalidArgument("GMRES restart length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimated bytes needed by a sparse LU of `a`.
pub fn estimate_lu_bytes(a: &CsrMatrix) -> Result<usize> {
    Ok(symmetric_fill_estimate(a)?.saturating_mul(LU_BYTES_PER_FILL_ENTRY))
}

enum Backend {
    Lu(Box<DirectLu>),
    Cholesky(Box<SparseCholesky>),
    Gmres(Option<Ilu0>),
}

/// A prepared solver for repeated right-hand sides with a fixed matrix.
pub struct Solver<'a> {
    matrix: Cow<'a, CsrMatrix>,
    backend: Backend,
    config: SolverConfig,
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    Ok(())
}

fn iterative(a: &CsrMatrix, config: &SolverConfig) -> Result<Backend> {
    let ilu = match config.preconditioner {
        Preconditioner::Ilu0 => Some(Ilu0::new(a)?),
        Preconditioner::None => None,
    };
    Ok(Backend::Gmres(ilu))
}

fn fits_budget(a: &CsrMatrix, config: &SolverConfig) -> Result<bool> {
    let bytes = estimate_lu_bytes(a)?;
    log::debug!("direct factorization estimate {} MiB for n = {}", bytes >> 20, a.nrows());
    Ok(bytes <= config.memory_budget)
}

impl<'a> Solver<'a> {
    /// Prepares a solver for a general square matrix.
    pub fn new(matrix: &'a CsrMatrix, config: &SolverConfig) -> Result<Self> {
        Self::prepare(Cow::Borrowed(matrix), config, false)
    }

    /// Prepares a solver for a symmetric positive definite matrix. The
    /// direct path uses a Cholesky factorization.
    pub fn new_spd(matrix: &'a CsrMatrix, config: &SolverConfig) -> Result<Self> {
        Self::prepare(Cow::Borrowed(matrix), config, true)
    }

    /// Like [`Solver::new_spd`], taking ownership of the matrix.
    pub fn owned_spd(matrix: CsrMatrix, config: &SolverConfig) -> Result<Solver<'static>> {
        Solver::prepare(Cow::Owned(matrix), config, true)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    fn prepare(matrix: Cow<'a, CsrMatrix>, config: &SolverConfig, spd: bool) -> Result<Self> {
        config.validate()?;
        let a: &CsrMatrix = &matrix;
        check_square(a)?;
        faer::set_global_parallelism(faer::Par::Seq);
        let direct = |m: &CsrMatrix| -> Result<Backend> {
            if m.nrows() == 0 {
                return Ok(Backend::Gmres(None));
            }
            Ok(if spd {
                Backend::Cholesky(Box::new(SparseCholesky::factor(m)?))
            } else {
                Backend::Lu(Box::new(DirectLu::factor(m)?))
            })
        };
        let backend = match config.method {
            Method::Gmres => iterative(a, config)?,
            Method::DirectLu => {
                if !fits_budget(a, config)? {
                    return Err(Error::Resource(format!(
                        "direct factorization of a {} x {} system exceeds the memory budget of {} MiB; use the gmres or auto solver",
                        a.nrows(),
                        a.ncols(),
                        config.memory_budget >> 20
                    )));
                }
                direct(a)?
            }
            Method::Auto => {
                if fits_budget(a, config)? {
                    direct(a)?
                } else {
                    log::info!("system of size {} exceeds the direct solver budget, using GMRES", a.nrows());
                    iterative(a, config)?
                }
            }
        };
        Ok(Self { matrix, backend, config: config.clone() })
    }

    pub fn is_direct(&self) -> bool {
        !matches!(self.backend, Backend::Gmres(_))
    }

    fn relative_residual(&self, x: &[f64], b: &[f64], bnorm: f64) -> (Vec<f64>, f64) {
        let mut r = self.matrix.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let res = norm2(&r) / bnorm;
        (r, res)
    }

    fn direct_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Lu(lu) => lu.solve(b),
            Backend::Cholesky(llt) => llt.solve(b),
            Backend::Gmres(_) => unreachable!(),
        }
    }

    /// Solves `A x = b`, checking the relative residual against the
    /// configured tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.nrows();
        if b.len() != n {
            return Err(Error::InvalidArgument(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let tolerance = self.config.tolerance;
        if let Backend::Gmres(ilu) = &self.backend {
            let out = gmres::gmres(
                &self.matrix,
                b,
                ilu.as_ref(),
                tolerance,
                self.config.restart,
                self.config.max_iterations,
            )?;
            log::debug!("GMRES converged in {} iterations, residual {:e}", out.iterations, out.residual);
            return Ok(out.x);
        }

        let mut x = self.direct_solve(b);
        let (mut r, mut residual) = self.relative_residual(&x, b, bnorm);
        let mut steps = 0;
        while residual.is_finite() && residual > tolerance && steps < MAX_REFINEMENT_STEPS {
            let dx = self.direct_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
            (r, residual) = self.relative_residual(&x, b, bnorm);
            steps += 1;
        }
        if !residual.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix("direct solve produced non-finite values".into()));
        }
        if residual > tolerance {
            return Err(Error::ResidualCheck { residual, tolerance });
        }
        Ok(x)
    }
}

/// Solves the sparse system with the configured method.
pub fn solve(system: &SparseSystem, config: &SolverConfig) -> Result<Vec<f64>> {
    Solver::new(&system.matrix, config)?.solve(&system.rhs)
}

/// Solves a symmetric positive definite system.
pub fn solve_spd(matrix: &CsrMatrix, rhs: &[f64], config: &SolverConfig) -> Result<Vec<f64>> {
    Solver::new_spd(matrix, config)?.solve(rhs)
}
