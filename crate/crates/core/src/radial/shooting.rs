//! Bisection shooting on `U(0)` for `-U'' - ((d-1)/r) U' = f(U)`, `U'(0) = 0`.
//!
//! Trajectories are classified as overshooting (U crosses zero) or
//! undershooting (U turns upward while positive). The two bracketing
//! trajectories coincide up to a matching radius; beyond it the decaying tail
//! is obtained by integrating backward from `r_max` with asymptotic data, which
//! is stable because the unwanted growing mode decays in that direction.

use super::tail::fit_tail_amplitude;
use super::RadialProfile;
use crate::error::{Error, Result};
use crate::nonlin::{Family, Nonlinearity};

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions {
    pub h: f64,
    pub r_max: f64,
    /// Decay and residual tolerance.
    pub tol: f64,
    /// Upper end of the `U(0)` search range for field-type terms.
    pub u0_max: f64,
    /// Tolerance on the relative tail-fit residual.
    pub fit_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            h: 1e-3,
            r_max: 40.0,
            tol: 1e-8,
            u0_max: 20.0,
            fit_tol: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    Over,
    Under,
}

struct Ode<'a> {
    nl: &'a Nonlinearity,
    dm1: f64,
}

impl Ode<'_> {
    #[inline]
    fn rhs(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        let fu = self.nl.f(u);
        if r == 0.0 {
            (v, -fu / (self.dm1 + 1.0))
        } else {
            (v, -self.dm1 / r * v - fu)
        }
    }

    #[inline]
    fn rk4(&self, r: f64, u: f64, v: f64, h: f64) -> (f64, f64) {
        let (a1, b1) = self.rhs(r, u, v);
        let (a2, b2) = self.rhs(r + 0.5 * h, u + 0.5 * h * a1, v + 0.5 * h * b1);
        let (a3, b3) = self.rhs(r + 0.5 * h, u + 0.5 * h * a2, v + 0.5 * h * b2);
        let (a4, b4) = self.rhs(r + h, u + h * a3, v + h * b3);
        (
            u + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
            v + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        )
    }
}

fn substeps(nl: &Nonlinearity, u0: f64, h: f64) -> usize {
    let stiff = nl.df(u0).abs().max(nl.df(0.0).abs()).max(1.0).sqrt();
    ((h * stiff / 0.05).ceil() as usize).max(1)
}

/// Integrates forward from `U(0) = u0`; records grid values when `record` is set.
fn trajectory(
    ode: &Ode,
    u0: f64,
    h: f64,
    m: usize,
    r_stop: f64,
    mut record: Option<&mut Vec<(f64, f64)>>,
) -> Fate {
    let (mut u, mut v) = (u0, 0.0);
    if let Some(rec) = record.as_deref_mut() {
        rec.push((u, v));
    }
    let steps = (r_stop / h).ceil() as usize;
    for i in 0..steps {
        if i == 0 {
            // Taylor start U0 + a r² + b r⁴ avoids the 1/r coefficient at the origin
            let d = ode.dm1 + 1.0;
            let a = -ode.nl.f(u0) / (2.0 * d);
            let b = -ode.nl.df(u0) * a / (4.0 * (d + 2.0));
            u = u0 + a * h * h + b * h.powi(4);
            v = 2.0 * a * h + 4.0 * b * h.powi(3);
        } else {
            // the 1/r coefficient degrades RK4 near the origin; refine there
            let sub = m * (800 / (i + 1)).max(1);
            let hs = h / sub as f64;
            for k in 0..sub {
                let r = i as f64 * h + k as f64 * hs;
                (u, v) = ode.rk4(r, u, v, hs);
            }
        }
        if let Some(rec) = record.as_deref_mut() {
            rec.push((u, v));
        }
        if !(u >= 0.0) {
            return Fate::Over;
        }
        if v > 0.0 {
            return Fate::Under;
        }
    }
    Fate::Under
}

/// Solves for the ground state by bisection shooting.
pub fn shoot_ground_state(nl: &Nonlinearity, d: usize, opts: &ShootingOptions) -> Result<RadialProfile> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(d));
    }
    if !nl.is_normalized() {
        return Err(Error::InvalidNonlinearity("shooting requires f'(0) = -1".into()));
    }
    let ode = Ode {
        nl,
        dm1: d as f64 - 1.0,
    };
    let h = opts.h;
    let r_cls = 3.0 * opts.r_max;
    let fate = |u0: f64| trajectory(&ode, u0, h, substeps(nl, u0, h), r_cls, None);

    let roots = nl.positive_roots();
    let (mut lo, mut hi) = match nl.family() {
        Some(Family::Bistable) => {
            let theta = roots[0];
            let one = roots[1];
            let lo = theta + 1e-9 * (one - theta);
            let hi = one - 1e-9 * (one - theta);
            if fate(lo) != Fate::Under || fate(hi) != Fate::Over {
                return Err(Error::NoGroundState(format!(
                    "no sign change of the shooting map on ({theta}, {one})"
                )));
            }
            (lo, hi)
        }
        Some(Family::Field) => {
            let theta = roots[0];
            let lo = theta * (1.0 + 1e-9);
            if fate(lo) != Fate::Under {
                return Err(Error::NoGroundState("trajectory from θ⁺ does not undershoot".into()));
            }
            let mut a = lo;
            let mut b = theta * 1.25;
            loop {
                if b > opts.u0_max {
                    return Err(Error::NoGroundState(format!(
                        "no overshooting trajectory with U(0) ≤ {}",
                        opts.u0_max
                    )));
                }
                if fate(b) == Fate::Over {
                    break;
                }
                a = b;
                b *= 1.25;
            }
            (a, b)
        }
        None => {
            return Err(Error::InvalidNonlinearity(
                "sign pattern is neither bistable nor field-type".into(),
            ))
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match fate(mid) {
            Fate::Under => lo = mid,
            Fate::Over => hi = mid,
        }
    }

    let m = substeps(nl, hi, h);
    let n = (opts.r_max / h).round() as usize;
    let mut t_lo = Vec::with_capacity(n + 1);
    let mut t_hi = Vec::with_capacity(n + 1);
    trajectory(&ode, lo, h, m, opts.r_max, Some(&mut t_lo));
    trajectory(&ode, hi, h, m, opts.r_max, Some(&mut t_hi));

    // matching radius: last grid point where the brackets agree closely
    let len = t_lo.len().min(t_hi.len()).min(n + 1);
    let mut im = 0;
    for i in 0..len {
        let (a, da) = t_lo[i];
        let (b, db) = t_hi[i];
        let mid = 0.5 * (a + b);
        if !(a > 0.0 && b > 0.0 && da <= 0.0 && db <= 0.0) || (a - b).abs() > 1e-8 * mid {
            break;
        }
        im = i;
    }
    im = im.saturating_sub(10);
    if im < 10 {
        return Err(Error::numeric("ground-state matching", f64::NAN));
    }
    let mut u = vec![0.0; n + 1];
    let mut du = vec![0.0; n + 1];
    for i in 0..=im {
        u[i] = 0.5 * (t_lo[i].0 + t_hi[i].0);
        du[i] = 0.5 * (t_lo[i].1 + t_hi[i].1);
    }
    if im < n {
        backward_tail(&ode, h, m, n, im, &mut u, &mut du)?;
    }
    let r_max = n as f64 * h;

    for i in 0..n {
        if !(u[i] > 0.0 && u[i + 1] < u[i]) {
            return Err(Error::numeric(
                "ground-state monotonicity",
                (u[i + 1] - u[i]).max(-u[i]),
            ));
        }
    }
    if u[n] >= opts.tol {
        return Err(Error::numeric("ground-state decay", u[n]));
    }
    let ode_residual = ode_residual(nl, d, h, &u);
    if ode_residual > 10.0 * opts.tol {
        return Err(Error::numeric("ground-state ODE residual", ode_residual));
    }
    let mut prof = RadialProfile {
        d,
        h,
        r_max,
        u,
        du,
        amplitude: f64::NAN,
        fit_window: (0.5 * r_max, 0.8 * r_max),
        fit_residual: f64::NAN,
        matching_radius: im as f64 * h,
        ode_residual,
        nl: nl.clone(),
    };
    let fit = fit_tail_amplitude(&prof, prof.fit_window, opts.fit_tol)?;
    prof.amplitude = fit.amplitude;
    prof.fit_residual = fit.residual;
    Ok(prof)
}

fn backward_tail(
    ode: &Ode,
    h: f64,
    m: usize,
    n: usize,
    im: usize,
    u: &mut [f64],
    du: &mut [f64],
) -> Result<()> {
    let target = u[im];
    let r_max = n as f64 * h;
    let rm = im as f64 * h;
    let hs = h / m as f64;
    let run = |c: f64, u: &mut [f64], du: &mut [f64]| -> f64 {
        let mut a = c;
        let mut b = -c * (1.0 + ode.dm1 / (2.0 * r_max));
        u[n] = a;
        du[n] = b;
        for i in (im..n).rev() {
            for k in 0..m {
                let r = (i + 1) as f64 * h - k as f64 * hs;
                (a, b) = ode.rk4(r, a, b, -hs);
            }
            if i > im {
                u[i] = a;
                du[i] = b;
            }
        }
        a
    };
    let decay = (-(r_max - rm)).exp() * (rm / r_max).powf(ode.dm1 / 2.0);
    let mut c = target * decay;
    let mut scratch_u = u.to_vec();
    let mut scratch_du = du.to_vec();
    let mut mismatch = f64::INFINITY;
    for _ in 0..50 {
        let got = run(c, &mut scratch_u, &mut scratch_du);
        mismatch = (got - target).abs() / target;
        if mismatch < 1e-13 {
            break;
        }
        c *= target / got;
    }
    if mismatch > 1e-10 {
        return Err(Error::numeric("ground-state tail matching", mismatch));
    }
    u[im + 1..=n].copy_from_slice(&scratch_u[im + 1..=n]);
    du[im + 1..=n].copy_from_slice(&scratch_du[im + 1..=n]);
    Ok(())
}

/// Largest `|-U'' - ((d-1)/r)U' - f(U)|` over interior grid points, using
/// fourth-order central differences.
pub(crate) fn ode_residual(nl: &Nonlinearity, d: usize, h: f64, u: &[f64]) -> f64 {
    let n = u.len();
    let mut worst: f64 = 0.0;
    for i in 2..n.saturating_sub(2) {
        let r = i as f64 * h;
        let d2 = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h * h);
        let d1 = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
        let res = -d2 - (d as f64 - 1.0) / r * d1 - nl.f(u[i]);
        worst = worst.max(res.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: f64) -> Nonlinearity {
        Nonlinearity::power_field(p).unwrap()
    }

    #[test]
    fn sech_ground_state() {
        let prof = shoot_ground_state(&field(3.0), 1, &ShootingOptions::default()).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &v) in prof.u.iter().enumerate() {
            let x = prof.radius(i);
            if x <= 20.0 {
                worst = worst.max((v - 2f64.sqrt() / x.cosh()).abs());
            }
        }
        assert!(worst < 1e-6, "max error {worst}");
        assert!((prof.u0() - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn quadratic_field_peak() {
        let prof = shoot_ground_state(&field(2.0), 1, &ShootingOptions::default()).unwrap();
        assert!((prof.u0() - 1.5).abs() < 1e-9, "{}", prof.u0());
    }

    #[test]
    fn bistable_profile_is_bounded_by_one() {
        let nl = Nonlinearity::bistable_cubic(0.25).unwrap().normalize().unwrap();
        for d in 1..=3 {
            let prof = shoot_ground_state(&nl, d, &ShootingOptions::default()).unwrap();
            assert!(prof.u0() > 0.25 && prof.u0() < 1.0);
        }
    }

    #[test]
    fn supercritical_exponent_has_no_ground_state() {
        let opts = ShootingOptions {
            h: 2e-3,
            r_max: 30.0,
            ..Default::default()
        };
        let r = shoot_ground_state(&field(6.0), 3, &opts);
        assert!(matches!(r, Err(Error::NoGroundState(_))), "{r:?}");
    }

    #[test]
    fn requires_normalized_term() {
        let nl = Nonlinearity::bistable_cubic(0.25).unwrap();
        assert!(shoot_ground_state(&nl, 1, &ShootingOptions::default()).is_err());
    }
}
