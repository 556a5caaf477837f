//! Radial Green function of `-Δ + 1` and the growing radial solution `V★`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{bessel_i0e, bessel_i1e, bessel_k0, bessel_k1, sphere_area};

/// Asymptotic amplitudes: `K(r) ~ κ r^{-(d-1)/2} e^{-r}`, `V★(r) ~ B r^{-(d-1)/2} e^{r}`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct KernelConstants {
    pub d: usize,
    pub kappa: f64,
    pub b: f64,
}

impl KernelConstants {
    pub fn for_dimension(d: usize) -> Result<Self> {
        let (kappa, b) = match d {
            1 => (0.5, 0.5),
            2 => (1.0 / (2.0 * (2.0 * PI).sqrt()), 1.0 / (2.0 * PI).sqrt()),
            3 => (1.0 / (4.0 * PI), 0.5),
            _ => return Err(Error::UnsupportedDimension(d)),
        };
        Ok(KernelConstants { d, kappa, b })
    }

    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.d)
    }
}

/// `(K, K', K'')` at radius `r`. In d = 1 the value at `r = 0` is allowed.
pub fn kernel_k(d: usize, r: f64) -> Result<(f64, f64, f64)> {
    let bad = |r: f64| Error::Domain(format!("kernel radius {r} must be positive"));
    match d {
        1 => {
            if !(r >= 0.0) {
                return Err(bad(r));
            }
            let e = 0.5 * (-r).exp();
            Ok((e, -e, e))
        }
        2 => {
            if !(r > 0.0) {
                return Err(bad(r));
            }
            let c = 1.0 / (2.0 * PI);
            let (k0, k1) = (bessel_k0(r), bessel_k1(r));
            Ok((c * k0, -c * k1, c * (k0 + k1 / r)))
        }
        3 => {
            if !(r > 0.0) {
                return Err(bad(r));
            }
            let e = (-r).exp() / (4.0 * PI);
            Ok((
                e / r,
                -e * (1.0 / r + 1.0 / (r * r)),
                e * (1.0 / r + 2.0 / (r * r) + 2.0 / (r * r * r)),
            ))
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// `V★(r) e^{-r}` and `V★'(r) e^{-r}`; scaled so large radii stay finite.
pub fn vstar_scaled(d: usize, r: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} must be nonnegative")));
    }
    Ok(match d {
        1 => {
            let e = (-2.0 * r).exp();
            (0.5 * (1.0 + e), 0.5 * (1.0 - e))
        }
        2 => (bessel_i0e(r), bessel_i1e(r)),
        3 => {
            if r < 1e-4 {
                let r2 = r * r;
                let s = (1.0 + r2 / 6.0) * (-r).exp();
                let ds = (r / 3.0 + r * r2 / 30.0) * (-r).exp();
                (s, ds)
            } else {
                let e = (-2.0 * r).exp();
                let sh = 0.5 * (1.0 - e);
                let ch = 0.5 * (1.0 + e);
                (sh / r, (r * ch - sh) / (r * r))
            }
        }
        _ => return Err(Error::UnsupportedDimension(d)),
    })
}

/// Radial solution of `-ΔV + V = 0` with `V(0) = 1`.
pub fn kernel_vstar(d: usize, r: f64) -> Result<f64> {
    Ok(vstar_scaled(d, r)?.0 * r.exp())
}

pub fn kernel_vstar_derivative(d: usize, r: f64) -> Result<f64> {
    Ok(vstar_scaled(d, r)?.1 * r.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        assert_eq!(kernel_k(1, 0.0).unwrap().0, 0.5);
        assert_relative_eq!(kernel_k(3, 1.0).unwrap().0, (-1.0f64).exp() / (4.0 * PI), max_relative = 1e-15);
        for d in 1..=3 {
            assert_eq!(kernel_vstar(d, 0.0).unwrap(), 1.0);
        }
        assert_relative_eq!(kernel_vstar(3, 1.0).unwrap(), 1.0f64.sinh(), max_relative = 1e-14);
        assert_relative_eq!(KernelConstants::for_dimension(2).unwrap().kappa, 0.199_471_140_200_716_3, max_relative = 1e-14);
        assert_eq!(KernelConstants::for_dimension(3).unwrap().b, 0.5);
    }

    #[test]
    fn invalid_arguments() {
        assert!(matches!(kernel_k(2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kernel_k(1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(kernel_k(4, 1.0), Err(Error::UnsupportedDimension(4))));
    }

    #[test]
    fn vstar_is_sphere_average_of_exponential() {
        // (1/|S²|) ∫ e^{r ω_y} dω = (1/2) ∫_{-1}^{1} e^{r t} dt
        let r = 1.7;
        let n = 2000;
        let avg = crate::nonlin::simpson(|t| (r * t).exp(), -1.0, 1.0, n) / 2.0;
        assert_relative_eq!(kernel_vstar(3, r).unwrap(), avg, max_relative = 1e-12);
        // circle average in d = 2
        let avg2 = crate::nonlin::simpson(|t| (r * t.cos()).exp(), 0.0, PI, n) / PI;
        assert_relative_eq!(kernel_vstar(2, r).unwrap(), avg2, max_relative = 1e-12);
    }

    #[test]
    fn kernels_solve_the_radial_equation() {
        // -K'' - (d-1)/r K' + K = 0 away from the origin, same for V★
        for d in 1..=3 {
            for &r in &[0.5, 2.0, 9.0] {
                let (k, k1, k2) = kernel_k(d, r).unwrap();
                let res = -k2 - (d as f64 - 1.0) / r * k1 + k;
                assert!(res.abs() < 1e-12 * k.abs().max(1e-300) * 10.0, "d={d} r={r} res={res}");
                let e = 1e-4;
                let v = |s: f64| kernel_vstar(d, s).unwrap();
                let v2 = (v(r + e) - 2.0 * v(r) + v(r - e)) / (e * e);
                let v1 = kernel_vstar_derivative(d, r).unwrap();
                let res = -v2 - (d as f64 - 1.0) / r * v1 + v(r);
                assert!(res.abs() < 1e-5 * v(r), "V★ d={d} r={r} res={res}");
            }
        }
    }

    #[test]
    fn asymptotic_amplitudes() {
        for d in 1..=3 {
            let c = KernelConstants::for_dimension(d).unwrap();
            let r: f64 = 400.0;
            let w = r.powf((d as f64 - 1.0) / 2.0);
            let k = kernel_k(d, r).unwrap().0 * w * r.exp();
            let v = vstar_scaled(d, r).unwrap().0 * w;
            assert_relative_eq!(k, c.kappa, max_relative = 1e-3);
            assert_relative_eq!(v, c.b, max_relative = 1e-3);
        }
    }
}
