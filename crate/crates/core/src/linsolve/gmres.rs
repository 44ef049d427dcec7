//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

use super::ilu::Ilu0;

pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn precondition(ilu: Option<&Ilu0>, v: &mut [f64]) {
    if let Some(ilu) = ilu {
        ilu.apply_in_place(v);
    }
}

/// Solves `A x = b` to relative residual `tolerance` (measured on the true
/// residual at every restart).
pub(crate) fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    ilu: Option<&Ilu0>,
    tolerance: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x, iterations: 0, residual: 0.0 });
    }

    let mut iterations = 0;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut hess = vec![vec![0.0; restart]; restart + 1];
    let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
    let mut g = vec![0.0; restart + 1];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];

    loop {
        let mut r = a.mul_vec(&x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm2(&r);
        let residual = beta / bnorm;
        if residual <= tolerance {
            return Ok(GmresOutcome { x, iterations, residual });
        }
        if !residual.is_finite() || iterations >= max_iterations {
            return Err(Error::NoConvergence { iterations, residual });
        }

        basis.clear();
        r.iter_mut().for_each(|v| *v /= beta);
        basis.push(r);
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;

        let mut k = 0;
        while k < restart && iterations < max_iterations {
            z.copy_from_slice(&basis[k]);
            precondition(ilu, &mut z);
            a.mul_vec_into(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let h = dot(&w, v);
                hess[i][k] = h;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
            }
            let h_next = norm2(&w);
            hess[k + 1][k] = h_next;

            for i in 0..k {
                let (h0, h1) = (hess[i][k], hess[i + 1][k]);
                hess[i][k] = cs[i] * h0 + sn[i] * h1;
                hess[i + 1][k] = -sn[i] * h0 + cs[i] * h1;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];

            iterations += 1;
            k += 1;
            if h_next == 0.0 || g[k].abs() / bnorm <= 0.5 * tolerance {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for (yi, v) in y.iter().zip(&basis) {
            z.iter_mut().zip(v).for_each(|(zi, vi)| *zi += yi * vi);
        }
        precondition(ilu, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
    }
}
