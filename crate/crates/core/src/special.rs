//! Modified Bessel functions of order 0 and 1, sphere areas, and the smooth step.
//!
//! The Bessel functions are evaluated from their integral representations
//!
//! ```text
//! K_n(x) = ∫_0^∞ exp(-x cosh t) cosh(n t) dt
//! I_n(x) = (1/π) ∫_0^π exp(x cos θ) cos(n θ) dθ
//! ```
//!
//! with the trapezoid rule. Both integrands are analytic in a strip around the
//! real axis (and the second is periodic), so the rule converges geometrically
//! in the number of nodes and a fixed step gives full double precision.

use std::f64::consts::PI;

/// `exp(x) K_ν(x)` for ν ∈ {0, 1}, x > 0.
fn k_scaled(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    // Step must resolve the Gaussian core of width ~ 1/sqrt(x) for large x.
    let h = 0.2_f64.min(0.5 / x.sqrt());
    let integrand = |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let mut sum = 0.5 * integrand(0.0);
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        let term = integrand(t);
        sum += term;
        if term < 1e-18 * sum || t > 60.0 {
            break;
        }
        k += 1;
    }
    sum * h
}

/// `exp(-|x|) I_n(|x|)` for n ∈ {0, 1}.
fn i_scaled(n: i32, x: f64) -> f64 {
    let ax = x.abs();
    let nodes = 48 + 24 * (ax.sqrt().ceil() as usize);
    let step = PI / nodes as f64;
    let mut sum = 0.0;
    for k in 0..=nodes {
        let th = k as f64 * step;
        let w = if k == 0 || k == nodes { 0.5 } else { 1.0 };
        sum += w * (ax * (th.cos() - 1.0)).exp() * (n as f64 * th).cos();
    }
    sum * step / PI
}

/// Modified Bessel function of the first kind, order 0.
pub fn bessel_i0(x: f64) -> f64 {
    i_scaled(0, x) * x.abs().exp()
}

/// Modified Bessel function of the first kind, order 1 (odd in x).
pub fn bessel_i1(x: f64) -> f64 {
    x.signum() * i_scaled(1, x) * x.abs().exp()
}

/// Modified Bessel function of the second kind, order 0, for x > 0.
pub fn bessel_k0(x: f64) -> f64 {
    k_scaled(0.0, x) * (-x).exp()
}

/// Modified Bessel function of the second kind, order 1, for x > 0.
pub fn bessel_k1(x: f64) -> f64 {
    k_scaled(1.0, x) * (-x).exp()
}

/// `exp(x) K_0(x)`, finite for large x.
pub fn bessel_k0e(x: f64) -> f64 {
    k_scaled(0.0, x)
}

/// `exp(x) K_1(x)`.
pub fn bessel_k1e(x: f64) -> f64 {
    k_scaled(1.0, x)
}

/// `exp(-x) I_0(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    i_scaled(0, x)
}

/// `exp(-x) I_1(x)`.
pub fn bessel_i1e(x: f64) -> f64 {
    x.signum() * i_scaled(1, x)
}

/// Γ(d/2) for a positive integer d.
pub fn gamma_half(d: usize) -> f64 {
    assert!(d >= 1);
    let (mut g, mut arg) = if d % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = d as f64 / 2.0;
    while arg < target - 1e-12 {
        g *= arg;
        arg += 1.0;
    }
    g
}

/// Surface area |S^{d-1}| of the unit sphere in R^d (|S^0| = 2).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// C^∞ step: 0 on (-∞, 0], 1 on [1, ∞).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// First and second derivatives of [`smooth_step`].
pub fn smooth_step_derivs(t: f64) -> (f64, f64) {
    if t <= 0.0 || t >= 1.0 {
        return (0.0, 0.0);
    }
    // s = a/(a+b), a = e^{-1/t}, b = e^{-1/(1-t)}
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let da = a / (t * t);
    let db = -b / ((1.0 - t) * (1.0 - t));
    let dda = a * (1.0 / t.powi(4) - 2.0 / t.powi(3));
    let ddb = b * (1.0 / (1.0 - t).powi(4) - 2.0 / (1.0 - t).powi(3));
    let s = a + b;
    let ds = da + db;
    let dds = dda + ddb;
    let first = (da * s - a * ds) / (s * s);
    // second derivative of a/s
    let num = dda * s - a * dds;
    let second = num / (s * s) - 2.0 * first * ds / s;
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn i0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn reference_values() {
        assert_relative_eq!(bessel_i0(1.0), 1.266_065_877_752_008_4, max_relative = 1e-13);
        assert_relative_eq!(bessel_i1(1.0), 0.565_159_103_992_485_0, max_relative = 1e-13);
        assert_relative_eq!(bessel_k0(1.0), 0.421_024_438_240_708_3, max_relative = 1e-13);
        assert_relative_eq!(bessel_k1(1.0), 0.601_907_230_197_234_6, max_relative = 1e-13);
    }

    #[test]
    fn i0_matches_power_series() {
        for &x in &[0.0, 0.3, 2.0, 7.5, 15.0, 30.0] {
            assert_relative_eq!(bessel_i0(x), i0_series(x), max_relative = 1e-13);
        }
    }

    #[test]
    fn wronskian_identity() {
        // I0 K1 + I1 K0 = 1/x
        for &x in &[1e-3, 0.1, 0.9, 3.0, 12.0, 45.0, 300.0] {
            let w = bessel_i0e(x) * bessel_k1e(x) + bessel_i1e(x) * bessel_k0e(x);
            assert_relative_eq!(w, 1.0 / x, max_relative = 1e-12);
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        let x = 400.0;
        let lead = (PI / (2.0 * x)).sqrt();
        assert_relative_eq!(bessel_k0e(x), lead * (1.0 - 1.0 / (8.0 * x)), max_relative = 1e-5);
        assert_relative_eq!(bessel_i0e(x), (1.0 / (2.0 * PI * x)).sqrt() * (1.0 + 1.0 / (8.0 * x)), max_relative = 1e-5);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn smooth_step_derivatives_match_differences() {
        for &t in &[0.1, 0.35, 0.5, 0.8] {
            let e = 1e-5;
            let (d1, d2) = smooth_step_derivs(t);
            let fd1 = (smooth_step(t + e) - smooth_step(t - e)) / (2.0 * e);
            let fd2 = (smooth_step(t + e) - 2.0 * smooth_step(t) + smooth_step(t - e)) / (e * e);
            assert_relative_eq!(d1, fd1, max_relative = 1e-6);
            assert_relative_eq!(d2, fd2, max_relative = 1e-3, epsilon = 1e-4);
        }
    }
}
