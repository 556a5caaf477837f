//! Spectrum of the linearization `-∂²_r - ((d-1)/r)∂_r + ℓ(ℓ+d-2)/r² - f'(U)`
//! in a fixed angular sector.
//!
//! Cell-centred finite volumes with the `r^{d-1}` measure give a symmetric
//! tridiagonal pencil; after diagonal scaling its eigenvalues come from Sturm
//! bisection. In d = 1 the sectors ℓ = 0 and ℓ = 1 are the even and odd parts.

use serde::Serialize;

use super::RadialProfile;
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

struct Pencil {
    t: SymTridiag,
    /// cell masses `r_i^{d-1} h`
    w: Vec<f64>,
    r: Vec<f64>,
}

fn assemble(prof: &RadialProfile, ell: usize, zero_potential: bool) -> Result<Pencil> {
    let d = prof.d;
    if d == 1 && ell > 1 {
        return Err(Error::Domain("d = 1 has only the even (0) and odd (1) sectors".into()));
    }
    let h = prof.h;
    let n = (prof.r_max / h).round() as usize;
    let dm1 = d as f64 - 1.0;
    let cent = (ell * (ell + d).saturating_sub(2)) as f64;
    let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let w: Vec<f64> = r.iter().map(|&ri| ri.powf(dm1) * h).collect();
    let face = |k: usize| (k as f64 * h).powf(dm1) / h; // face at r = k h
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let v = if zero_potential {
            1.0
        } else {
            -prof.nl.df(prof.value(r[i]))
        };
        let left = if i == 0 {
            if d == 1 && ell == 1 {
                2.0 * face(0)
            } else {
                0.0
            }
        } else {
            face(i)
        };
        let right = if i + 1 == n { 2.0 * face(n) } else { face(i + 1) };
        diag[i] = (left + right) / w[i] + v + cent / (r[i] * r[i]);
        if i + 1 < n {
            off[i] = -face(i + 1) / (w[i] * w[i + 1]).sqrt();
        }
    }
    Ok(Pencil {
        t: SymTridiag::new(diag, off),
        w,
        r,
    })
}

/// Lowest `count` eigenvalues in sector `ell`, Dirichlet at `r_max`.
pub fn radial_spectrum(prof: &RadialProfile, ell: usize, count: usize) -> Result<Vec<f64>> {
    Ok(assemble(prof, ell, false)?.t.lowest(count))
}

/// Spectrum of the free operator `-Δ + 1` on the same grid.
pub fn free_spectrum(prof: &RadialProfile, ell: usize, count: usize) -> Result<Vec<f64>> {
    Ok(assemble(prof, ell, true)?.t.lowest(count))
}

/// `k`-th eigenpair of sector `ell`: eigenvalue, cell centres and the
/// eigenfunction (max-normalized, positive peak).
pub fn radial_mode(prof: &RadialProfile, ell: usize, k: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let p = assemble(prof, ell, false)?;
    let lambda = p.t.eigenvalue(k);
    let v = p.t.eigenvector(lambda);
    let res = p
        .t
        .apply(&v)
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max);
    if res > 1e-6 {
        return Err(Error::numeric("radial eigenvector", res));
    }
    let mut psi: Vec<f64> = v.iter().zip(&p.w).map(|(x, w)| x / w.sqrt()).collect();
    let (imax, _) = psi
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
    let s = psi[imax];
    psi.iter_mut().for_each(|x| *x /= s);
    Ok((lambda, p.r, psi))
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    pub radial: Vec<f64>,
    pub translational: Vec<f64>,
    /// Lowest eigenvalue in sector ℓ = 2 (absent in d = 1).
    pub higher: Option<f64>,
    pub tol: f64,
    pub nondegenerate: bool,
}

/// Kernel check: no radial eigenvalue in `(-tol, tol)`, a translational one at 0,
/// and nothing at 0 in higher sectors.
pub fn nondegeneracy(prof: &RadialProfile, tol: f64) -> Result<NondegeneracyReport> {
    let radial = radial_spectrum(prof, 0, 3)?;
    let translational = radial_spectrum(prof, 1, 2)?;
    let higher = if prof.d >= 2 {
        Some(radial_spectrum(prof, 2, 1)?[0])
    } else {
        None
    };
    let ok = radial.iter().all(|l| l.abs() >= tol)
        && translational.iter().any(|l| l.abs() < tol)
        && higher.map_or(true, |l| l >= tol);
    Ok(NondegeneracyReport {
        radial,
        translational,
        higher,
        tol,
        nondegenerate: ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::Nonlinearity;
    use crate::radial::{shoot_ground_state, ShootingOptions};

    #[test]
    fn poeschl_teller_levels() {
        let nl = Nonlinearity::power_field(3.0).unwrap();
        let prof = shoot_ground_state(&nl, 1, &ShootingOptions::default()).unwrap();
        let even = radial_spectrum(&prof, 0, 2).unwrap();
        let odd = radial_spectrum(&prof, 1, 1).unwrap();
        // potential 1 - 6 sech²: bound states at -3 and 0, continuum from 1
        assert!((even[0] + 3.0).abs() < 1e-4, "{even:?}");
        assert!(even[1] > 0.9);
        assert!(odd[0].abs() < 1e-4, "{odd:?}");
        let (_, r, psi) = radial_mode(&prof, 1, 0).unwrap();
        // odd mode is proportional to sech·tanh
        let norm = r
            .iter()
            .map(|&x| (x.tanh() / x.cosh()).abs())
            .fold(0.0, f64::max);
        for (x, p) in r.iter().zip(&psi).take(5000) {
            let exact = x.tanh() / x.cosh() / norm;
            assert!((p - exact).abs() < 1e-3, "x={x} {p} {exact}");
        }
    }

    #[test]
    fn free_operator_has_no_bound_states() {
        let nl = Nonlinearity::power_field(3.0).unwrap();
        let prof = shoot_ground_state(&nl, 1, &ShootingOptions::default()).unwrap();
        let free = free_spectrum(&prof, 0, 3).unwrap();
        assert!(free.iter().all(|&l| l >= 1.0));
    }

    #[test]
    fn three_dimensional_cubic_is_nondegenerate() {
        let nl = Nonlinearity::power_field(3.0).unwrap();
        let opts = ShootingOptions {
            h: 2e-3,
            ..Default::default()
        };
        let prof = shoot_ground_state(&nl, 3, &opts).unwrap();
        let rep = nondegeneracy(&prof, 1e-3).unwrap();
        assert!(rep.nondegenerate, "{rep:?}");
        assert!(rep.radial[0] < 0.0);
    }
}
