use super::{dot, norm2, Csr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    /// Stop when `‖r‖ ≤ rel_tol ‖b‖` ...
    pub rel_tol: f64,
    /// ... or when `‖r‖ ≤ abs_tol`.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgStats {
    pub iterations: usize,
    /// Relative residual `‖r_k‖ / ‖b‖` after each iteration, starting with the initial one.
    pub history: Vec<f64>,
}

impl CgStats {
    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }
}

pub(crate) enum CgOutcome {
    Converged(CgStats),
    Stagnated(CgStats),
    /// `pᵀAp ≤ 0` was met: the matrix is not positive definite.
    NegativeCurvature,
}

pub(crate) fn pcg_raw(a: &Csr, b: &[f64], x: &mut [f64], opts: &CgOptions) -> CgOutcome {
    let n = a.n;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = norm2(b);
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    let target = (opts.rel_tol * bnorm).max(opts.abs_tol);
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut rn = norm2(&r);
    let mut history = vec![rn / scale];
    if rn <= target {
        return CgOutcome::Converged(CgStats {
            iterations: 0,
            history,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome::NegativeCurvature;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rn = norm2(&r);
        history.push(rn / scale);
        if rn <= target {
            return CgOutcome::Converged(CgStats {
                iterations: it,
                history,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome::Stagnated(CgStats {
        iterations: opts.max_iter,
        history,
    })
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive-definite `a`.
/// `x` holds the initial guess on entry and the solution on exit.
pub fn pcg(a: &Csr, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<CgStats> {
    match pcg_raw(a, b, x, opts) {
        CgOutcome::Converged(s) => Ok(s),
        CgOutcome::Stagnated(s) => Err(Error::LinearSolve {
            iterations: s.iterations,
            history: s.history,
        }),
        CgOutcome::NegativeCurvature => Err(Error::LinearSolve {
            iterations: 0,
            history: vec![f64::NAN],
        }),
    }
}
