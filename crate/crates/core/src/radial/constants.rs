//! Interaction constants `D` (boundary coupling) and `E` (translation-mode energy).

use serde::Serialize;

use super::kernels::{vstar_scaled, KernelConstants};
use super::RadialProfile;
use crate::error::{Error, Result};
use crate::special::sphere_area;

/// Simpson's rule over samples on a uniform grid (trapezoid on a leftover panel).
pub(crate) fn integrate_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    let even = n - n % 2;
    let mut s = 0.0;
    for k in (0..even).step_by(2) {
        s += y[k] + 4.0 * y[k + 1] + y[k + 2];
    }
    let mut total = s * h / 3.0;
    if even < n {
        total += 0.5 * h * (y[n - 1] + y[n]);
    }
    total
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstantsD {
    /// `∫ g(U(|x|)) e^{-y} dx` by radial quadrature against `V★`.
    pub volume: f64,
    /// `2 A B |S^{d-1}|`.
    pub flux: f64,
    /// `|D_volume - D_flux| / D_flux`.
    pub relative_gap: f64,
}

fn check(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numeric(what, v))
    }
}

pub fn constant_d(prof: &RadialProfile) -> Result<ConstantsD> {
    let kc = KernelConstants::for_dimension(prof.d)?;
    let dm1 = prof.d as f64 - 1.0;
    let mut y = Vec::with_capacity(prof.len());
    for (i, &u) in prof.u.iter().enumerate() {
        let r = prof.radius(i);
        let (vs, _) = vstar_scaled(prof.d, r)?;
        y.push(prof.nl.g(u) * vs * r.exp() * r.powf(dm1));
    }
    let volume = check(sphere_area(prof.d) * integrate_samples(&y, prof.h), "D volume quadrature")?;
    let flux = 2.0 * prof.amplitude * kc.b * kc.sphere_area();
    Ok(ConstantsD {
        volume,
        flux,
        relative_gap: (volume - flux).abs() / flux,
    })
}

/// Both sides of `∫ g'(U) ∂_y U e^{-y} = ∫ g(U) e^{-y}`.
pub fn ibp_check(prof: &RadialProfile) -> Result<(f64, f64)> {
    let dm1 = prof.d as f64 - 1.0;
    let mut lhs = Vec::with_capacity(prof.len());
    for (i, (&u, &du)) in prof.u.iter().zip(&prof.du).enumerate() {
        let r = prof.radius(i);
        let (_, dvs) = vstar_scaled(prof.d, r)?;
        // sphere average of ω_y e^{-r ω_y} is -V★'(r)
        lhs.push(prof.nl.dg(u) * du * (-dvs * r.exp()) * r.powf(dm1));
    }
    let s = sphere_area(prof.d);
    Ok((s * integrate_samples(&lhs, prof.h), constant_d(prof)?.volume))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstantE {
    /// `∫ |∇∂_y U|² + |∂_y U|²`.
    pub value: f64,
    /// `∫ g'(U) (∂_y U)²`, equal to `value` by the equation for `∂_y U`.
    pub weighted: f64,
}

pub fn constant_e(prof: &RadialProfile) -> Result<ConstantE> {
    let d = prof.d as f64;
    let mut grad = Vec::with_capacity(prof.len());
    let mut weighted = Vec::with_capacity(prof.len());
    for (i, (&u, &du)) in prof.u.iter().zip(&prof.du).enumerate() {
        let r = prof.radius(i);
        let d2 = prof.second_derivative_at(r, u, du);
        let jac = r.powf(d - 1.0);
        // sphere averages: |H e_y|² → U''²/d + (d-1)/d (U'/r)², (∂_y U)² → U'²/d
        let cross = if r > 0.0 { (du / r).powi(2) } else { d2 * d2 };
        grad.push(jac * (d2 * d2 / d + (d - 1.0) / d * cross + du * du / d));
        weighted.push(jac * prof.nl.dg(u) * du * du / d);
    }
    let s = sphere_area(prof.d);
    Ok(ConstantE {
        value: check(s * integrate_samples(&grad, prof.h), "E quadrature")?,
        weighted: check(s * integrate_samples(&weighted, prof.h), "E quadrature")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::Nonlinearity;
    use crate::radial::{shoot_ground_state, ShootingOptions};

    #[test]
    fn one_dimensional_closed_forms() {
        for (p, a, dd, e) in [
            (3.0, 2.0 * 2f64.sqrt(), 4.0 * 2f64.sqrt(), 3.2),
            (2.0, 6.0, 12.0, 72.0 / 35.0),
        ] {
            let nl = Nonlinearity::power_field(p).unwrap();
            let prof = shoot_ground_state(&nl, 1, &ShootingOptions::default()).unwrap();
            assert!((prof.amplitude / a - 1.0).abs() < 1e-6, "A = {}", prof.amplitude);
            let c = constant_d(&prof).unwrap();
            assert!((c.volume / dd - 1.0).abs() < 1e-6, "D = {}", c.volume);
            assert!(c.relative_gap < 1e-6);
            let ce = constant_e(&prof).unwrap();
            assert!((ce.value / e - 1.0).abs() < 1e-6, "E = {}", ce.value);
            assert!((ce.weighted / e - 1.0).abs() < 1e-6);
            let (l, r) = ibp_check(&prof).unwrap();
            assert!((l / r - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn flux_and_volume_agree_in_higher_dimensions() {
        let nl = Nonlinearity::power_field(3.0).unwrap();
        for d in [2, 3] {
            let prof = shoot_ground_state(&nl, d, &ShootingOptions::default()).unwrap();
            let c = constant_d(&prof).unwrap();
            assert!(c.relative_gap < 0.02, "d={d}: {c:?}");
            let e = constant_e(&prof).unwrap();
            assert!(e.value > 0.0 && (e.value / e.weighted - 1.0).abs() < 1e-4, "{e:?}");
        }
    }
}
