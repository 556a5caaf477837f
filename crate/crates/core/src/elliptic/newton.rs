use crate::error::{Error, Result};
use crate::linalg::{norm_inf, BandedLu, Csr};
use crate::nonlin::Nonlinearity;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Target for `max_i |K u - M f(u) - b|_i / M_i`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonSolution {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Pointwise residual `(K u - M f(u) - b) / M`.
pub fn semilinear_residual(k: &Csr, mass: &[f64], b: &[f64], nl: &Nonlinearity, u: &[f64]) -> Vec<f64> {
    let ku = k.apply(u);
    (0..u.len())
        .map(|i| (ku[i] - b[i]) / mass[i] - nl.f(u[i]))
        .collect()
}

/// Newton's method for `K u = M f(u) + b` with a banded direct solve and
/// step halving on the residual sup-norm.
pub fn solve_semilinear(
    k: &Csr,
    mass: &[f64],
    b: &[f64],
    nl: &Nonlinearity,
    start: &[f64],
    opts: &NewtonOptions,
) -> Result<NewtonSolution> {
    let mut u = start.to_vec();
    let mut r = semilinear_residual(k, mass, b, nl, &u);
    let mut rn = norm_inf(&r);
    for it in 0..=opts.max_iter {
        if rn <= opts.tol {
            return Ok(NewtonSolution {
                u,
                iterations: it,
                residual: rn,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let jd: Vec<f64> = u.iter().zip(mass).map(|(v, m)| -m * nl.df(*v)).collect();
        let jac = k.add_diagonal(&jd);
        let rhs: Vec<f64> = r.iter().zip(mass).map(|(v, m)| -v * m).collect();
        let step = BandedLu::factor(&jac)?.solve(&rhs);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let tr = semilinear_residual(k, mass, b, nl, &trial);
            let tn = norm_inf(&tr);
            if tn < rn || (t == 1.0 && tn < 10.0 * rn && rn < 1e-6) {
                u = trial;
                r = tr;
                rn = tn;
                break;
            }
            t *= 0.5;
            if t < 1.0 / 256.0 {
                return Err(Error::NewtonDiverged(format!(
                    "no descent after {it} iterations (residual {rn:.3e})"
                )));
            }
        }
    }
    Err(Error::NewtonDiverged(format!(
        "residual {rn:.3e} after {} iterations",
        opts.max_iter
    )))
}
