//! The approximate solution built from a spike chain, and its PDE residual.
//!
//! The residual is evaluated semi-analytically: ground states and their
//! derivatives come from the radial profile, while `φ₀` is the discrete
//! projection, whose grid equation `Δ_h φ₀ = φ₀` is used as exact. With
//! `ū = U₀ - φ₀ + χQ`, `Q = Σ_{k≠0} U_k + Σ_± ψ_± w_±`,
//!
//! ```text
//! Δū + f(ū) = g(ū) - g(U₀) + χ(ΔQ - Q) + 2∇χ·∇Q + QΔχ
//! ΔQ - Q    = -Σ g(U_k) + Σ_± [ψ(Δw - w) + 2∇ψ·∇w + wΔψ]
//! ```

use rayon::prelude::*;
use serde::Serialize;

use super::chain::{norm, SpikeChain, Vec2};
use crate::delaunay::DelaunaySolution;
use crate::domain::{Boundary, DomainKind, Field, NodeKind};
use crate::elliptic::{semilinear_residual, Operator, ProjectionResult};
use crate::linalg::{norm_inf, BandedLu};
use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::special::{bessel_i1, smooth_step, smooth_step_derivs};

/// Value, gradient (along, across the leg) and `Δw - w` of a leg residue.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResidueSample {
    pub w: f64,
    pub grad: [f64; 2],
    pub helmholtz: f64,
}

/// Periodic correction `w = u_L - Σ_j U(· - j L e)` carried by one leg.
pub trait LegResidue: Sync {
    fn period(&self) -> f64;
    /// Sample at a point with coordinates measured along and across the leg
    /// from one of its lattice points.
    fn sample(&self, along: f64, across: f64) -> ResidueSample;
}

/// Leg residue tabulated from a two-dimensional periodic solution.
pub struct PeriodicResidue {
    period: f64,
    w: Field,
    helmholtz: Field,
}

impl PeriodicResidue {
    pub fn from_solution(sol: &DelaunaySolution, profile: &RadialProfile) -> Result<Self> {
        if sol.d != 2 || sol.grid.is_none() {
            return Err(Error::UnsupportedDimension(sol.d));
        }
        let l = sol.period;
        let images = 4;
        let nl = &profile.nl;
        let mut w = sol.field.clone();
        let mut helm = sol.field.clone();
        for j in 0..w.ny {
            for i in 0..w.nx {
                let (x, y) = w.coords(i, j);
                let u = sol.field.at(i, j);
                let (mut chain, mut g_chain) = (0.0, 0.0);
                for k in -images..=images {
                    let v = profile.value(x.hypot(y - k as f64 * l));
                    chain += v;
                    g_chain += nl.g(v);
                }
                let id = j * w.nx + i;
                w.values[id] = u - chain;
                helm.values[id] = g_chain - nl.g(u);
            }
        }
        Ok(PeriodicResidue { period: l, w, helmholtz: helm })
    }
}

impl LegResidue for PeriodicResidue {
    fn period(&self) -> f64 {
        self.period
    }

    fn sample(&self, along: f64, across: f64) -> ResidueSample {
        let l = self.period;
        let y = along - l * (along / l).round();
        let x = across.abs();
        let at = |f: &Field, x: f64, y: f64| f.interpolate(x.abs(), y).unwrap_or(0.0);
        let e = self.w.h;
        let dy = (at(&self.w, x, (y + e).min(0.5 * l)) - at(&self.w, x, (y - e).max(-0.5 * l))) / (2.0 * e);
        let dx = (at(&self.w, x + e, y) - at(&self.w, x - e, y)) / (2.0 * e);
        ResidueSample {
            w: at(&self.w, x, y),
            grad: [dy, across.signum() * dx],
            helmholtz: at(&self.helmholtz, x, y),
        }
    }
}

/// Angular cutoff: zero where `y ≤ -α|x|`, one where `y ≥ 1 - (3α/4)|x|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cutoff {
    pub alpha: f64,
    /// Step of the difference quotients used for the second derivatives of the ramp argument.
    pub fd_step: f64,
}

impl Cutoff {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..4.0 / 3.0).contains(&alpha) {
            return Err(Error::Geometry(format!("cutoff slope {alpha} must lie in [0, 4/3)")));
        }
        Ok(Cutoff { alpha, fd_step: 1e-4 })
    }

    /// Narrowest vertical width of the transition band.
    pub fn band_width(&self) -> f64 {
        1.0 - 0.75 * self.alpha
    }

    fn ramp(&self, x: f64, y: f64) -> f64 {
        let m = (1.0 + x * x).sqrt();
        (y + self.alpha * (m - 1.0)) / (1.0 + self.alpha * (0.25 * m - 1.0))
    }

    /// `(χ, ∇χ, Δχ)`.
    pub fn eval(&self, x: f64, y: f64) -> (f64, Vec2, f64) {
        let t = self.ramp(x, y);
        if t <= 0.0 || t >= 1.0 {
            return (smooth_step(t), [0.0; 2], 0.0);
        }
        let e = self.fd_step;
        let tx = (self.ramp(x + e, y) - self.ramp(x - e, y)) / (2.0 * e);
        let ty = (self.ramp(x, y + e) - self.ramp(x, y - e)) / (2.0 * e);
        let txx = (self.ramp(x + e, y) - 2.0 * t + self.ramp(x - e, y)) / (e * e);
        let (s1, s2) = smooth_step_derivs(t);
        (smooth_step(t), [s1 * tx, s1 * ty], s2 * (tx * tx + ty * ty) + s1 * txx)
    }
}

/// Assembled approximate solution on the projection grid.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub field: Field,
    /// `Δū + f(ū)` at unknown nodes (zero elsewhere).
    pub residual: Field,
    pub residual_sup: f64,
    /// Largest residual outside the balls of radius `L₀/2` around the centres.
    pub outside_sup: f64,
    /// `outside_sup / residual_sup`.
    pub localization_ratio: f64,
    /// Force on the central spike read off the residual:
    /// `-(∫ R ∇U₀) / c` over the ball of radius `L₀` around `z₀`, with `c`
    /// normalizing the response to a unit exponential `e^{-y}`.
    pub measured_force: Vec2,
}

/// `c = ∫ g'(U₀) e^{-y} ∂_y U₀`, the projected response to a unit `e^{-y}` profile (d = 2).
pub fn force_normalization(profile: &RadialProfile) -> f64 {
    let nl = &profile.nl;
    let n = profile.len();
    let mut sum = 0.0;
    for i in 0..n {
        let r = profile.radius(i);
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        sum += w * nl.dg(profile.u[i]) * profile.du[i] * bessel_i1(r) * r;
    }
    -2.0 * std::f64::consts::PI * sum * profile.h
}

/// Builds `ū = Ū₀ + χ Σ_{k≠0} U(· - z_k) + χ(ψ₋w₋ + ψ₊w₊)` on the projection
/// grid and evaluates its residual.
pub fn assemble_ansatz(
    chain: &SpikeChain,
    pr: &ProjectionResult,
    profile: &RadialProfile,
    residues: [Option<&dyn LegResidue>; 2],
) -> Result<Ansatz> {
    if profile.d != 2 || chain.d != 2 {
        return Err(Error::UnsupportedDimension(chain.d));
    }
    if ((pr.center.1 - chain.l0).abs() > 1e-9) || pr.center.0 != 0.0 {
        return Err(Error::Geometry("projection was computed for a different z₀".into()));
    }
    let grid = &pr.grid;
    let alpha = match (grid.spec.flags().alpha, &grid.spec.kind) {
        (Some(a), _) => a,
        (None, DomainKind::Epigraph(Boundary::HalfPlane)) => 0.0,
        _ => return Err(Error::Geometry("the cutoff needs a half-plane or a cone wider than π".into())),
    };
    let cut = Cutoff::new(alpha)?;
    if grid.h > 0.25 * cut.band_width() {
        return Err(Error::Resolution(format!(
            "h = {} does not resolve a cutoff band of width {:.3}",
            grid.h,
            cut.band_width()
        )));
    }
    let legs = [
        (chain.s_minus, chain.theta_minus, chain.l_minus, residues[0]),
        (chain.s_plus, chain.theta_plus, chain.l_plus, residues[1]),
    ];
    for (_, _, l, r) in &legs {
        if let Some(r) = r {
            if (r.period() - l).abs() > 1e-6 * l {
                return Err(Error::Geometry(format!("residue period {} differs from spacing {l}", r.period())));
            }
        }
    }
    let nl = &profile.nl;
    let z0 = chain.z0();
    let spikes: Vec<Vec2> = chain.centers().into_iter().filter(|(k, _)| *k != 0).map(|(_, z)| z).collect();
    let radial = |dx: f64, dy: f64| -> (f64, Vec2) {
        let r = dx.hypot(dy);
        let (u, du) = profile.eval(r);
        if r == 0.0 {
            (u, [0.0; 2])
        } else {
            (u, [du * dx / r, du * dy / r])
        }
    };

    let per_node: Vec<(f64, f64)> = grid
        .unknowns
        .par_iter()
        .map(|&id| {
            let (x, y) = grid.coords(id);
            let u0 = radial(x - z0[0], y - z0[1]).0;
            let phi0 = pr.phi0.values[id];
            let (mut q, mut gq, mut hq) = (0.0, [0.0; 2], 0.0);
            for z in &spikes {
                let (v, dv) = radial(x - z[0], y - z[1]);
                q += v;
                gq[0] += dv[0];
                gq[1] += dv[1];
                hq -= nl.g(v);
            }
            for (s, theta, l, res) in &legs {
                let Some(res) = res else { continue };
                let (ox, oy) = (x - z0[0] - s[0], y - z0[1] - s[1]);
                let along = ox * theta[0] + oy * theta[1];
                let across = -ox * theta[1] + oy * theta[0];
                let t = (along - 0.5 * l) / (0.5 * l);
                let psi = smooth_step(t);
                if psi == 0.0 {
                    continue;
                }
                let (p1, p2) = smooth_step_derivs(t);
                let scale = 2.0 / l;
                let smp = res.sample(along, across);
                let gw = [
                    smp.grad[0] * theta[0] - smp.grad[1] * theta[1],
                    smp.grad[0] * theta[1] + smp.grad[1] * theta[0],
                ];
                let gpsi = [p1 * scale * theta[0], p1 * scale * theta[1]];
                q += psi * smp.w;
                gq[0] += psi * gw[0] + smp.w * gpsi[0];
                gq[1] += psi * gw[1] + smp.w * gpsi[1];
                hq += psi * smp.helmholtz
                    + 2.0 * (gpsi[0] * gw[0] + gpsi[1] * gw[1])
                    + smp.w * p2 * scale * scale;
            }
            let (chi, gchi, lchi) = cut.eval(x, y);
            let ubar = u0 - phi0 + chi * q;
            let r = nl.g(ubar) - nl.g(u0) + chi * hq + 2.0 * (gchi[0] * gq[0] + gchi[1] * gq[1]) + q * lchi;
            (ubar, r)
        })
        .collect();

    let mut field = Field::zeros(grid);
    let mut residual = Field::zeros(grid);
    let mut sup = 0.0f64;
    let mut outside = 0.0f64;
    let mut proj = [0.0; 2];
    let mut centers = spikes.clone();
    centers.push(z0);
    let ball = 0.5 * chain.l0;
    for (n, &id) in grid.unknowns.iter().enumerate() {
        let (ubar, r) = per_node[n];
        field.values[id] = ubar;
        residual.values[id] = r;
        sup = sup.max(r.abs());
        let (x, y) = grid.coords(id);
        if centers.iter().all(|z| (x - z[0]).hypot(y - z[1]) > ball) {
            outside = outside.max(r.abs());
        }
        let (_, du0) = radial(x - z0[0], y - z0[1]);
        if (x - z0[0]).hypot(y - z0[1]) <= chain.l0 {
            proj[0] += r * du0[0];
            proj[1] += r * du0[1];
        }
    }
    for id in 0..grid.len() {
        if grid.kinds[id] != NodeKind::Exterior && grid.index[id] == usize::MAX {
            field.values[id] = pr.ubar.values[id];
        }
    }
    let c = force_normalization(profile);
    let h2 = grid.h * grid.h;
    Ok(Ansatz {
        field,
        residual,
        residual_sup: sup,
        outside_sup: outside,
        localization_ratio: if sup > 0.0 { outside / sup } else { 0.0 },
        measured_force: [-proj[0] * h2 / c, -proj[1] * h2 / c],
    })
}

/// `|measured - model| / |model|` for a force vector pair.
pub fn relative_mismatch(measured: Vec2, model: Vec2) -> f64 {
    norm([measured[0] - model[0], measured[1] - model[1]]) / norm(model).max(f64::MIN_POSITIVE)
}

/// An ansatz after a few damped Newton steps on the grid equation.
#[derive(Clone, Debug)]
pub struct PolishedAnsatz {
    pub field: Field,
    pub residual_before: f64,
    pub residual_after: f64,
    pub steps: usize,
}

/// Up to `steps` Newton iterations for `-Δ_h u = f(u)` on the projection grid,
/// started from the assembled ansatz. Stops early when no damped step lowers
/// the residual.
pub fn polish_ansatz(ansatz: &Ansatz, pr: &ProjectionResult, profile: &RadialProfile, steps: usize) -> Result<PolishedAnsatz> {
    let grid = &pr.grid;
    let nl = &profile.nl;
    let zero = |_: f64, _: f64| 0.0;
    let op = Operator::assemble(grid);
    let b = Operator::boundary_rhs(grid, &zero);
    let mut u = ansatz.field.unknown_values(grid);
    let mut rn = norm_inf(&semilinear_residual(&op.stiffness, &op.mass, &b, nl, &u));
    let before = rn;
    let mut taken = 0;
    for _ in 0..steps {
        let r = semilinear_residual(&op.stiffness, &op.mass, &b, nl, &u);
        let jd: Vec<f64> = u.iter().zip(&op.mass).map(|(v, m)| -m * nl.df(*v)).collect();
        let rhs: Vec<f64> = r.iter().zip(&op.mass).map(|(v, m)| -v * m).collect();
        let step = BandedLu::factor(&op.stiffness.add_diagonal(&jd))?.solve(&rhs);
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 64.0 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let tn = norm_inf(&semilinear_residual(&op.stiffness, &op.mass, &b, nl, &trial));
            if tn < rn {
                u = trial;
                rn = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        taken += 1;
    }
    Ok(PolishedAnsatz {
        field: Field::from_unknowns(grid, &u, &zero),
        residual_before: before,
        residual_after: rn,
        steps: taken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::elliptic::{dirichlet_projection, ProjectionParams};
    use crate::nonlin::Nonlinearity;
    use crate::radial::{shoot_ground_state, ShootingOptions};

    fn profile() -> RadialProfile {
        let nl = Nonlinearity::power_field(3.0).unwrap();
        shoot_ground_state(&nl, 2, &ShootingOptions::default()).unwrap()
    }

    #[test]
    fn cutoff_bands() {
        let c = Cutoff::new(0.3).unwrap();
        for x in [-7.0, -1.0, 0.0, 2.5, 9.0] {
            assert_eq!(c.eval(x, -0.3 * f64::abs(x)).0, 0.0);
            assert_eq!(c.eval(x, -0.3 * f64::abs(x) - 0.2).0, 0.0);
            assert_eq!(c.eval(x, 1.0 - 0.225 * f64::abs(x)).0, 1.0);
        }
        let (x, y, e) = (1.3, 0.2, 1e-4);
        let (_, g, lap) = c.eval(x, y);
        let v = |x: f64, y: f64| c.eval(x, y).0;
        assert!((g[0] - (v(x + e, y) - v(x - e, y)) / (2.0 * e)).abs() < 1e-6);
        let fd = (v(x + e, y) + v(x - e, y) + v(x, y + e) + v(x, y - e) - 4.0 * v(x, y)) / (e * e);
        assert!((lap - fd).abs() < 1e-3 * (1.0 + lap.abs()));
        assert!(Cutoff::new(1.5).is_err());
    }

    #[test]
    fn normalization_matches_quadrature() {
        let prof = profile();
        let c = force_normalization(&prof);
        // direct polar quadrature of ∫ g'(U) e^{-y} ∂_y U
        let (nr, nt) = (3000, 256);
        let dr = 15.0 / nr as f64;
        let mut sum = 0.0;
        for i in 1..nr {
            let r = i as f64 * dr;
            let (u, du) = prof.eval(r);
            for k in 0..nt {
                let th = 2.0 * std::f64::consts::PI * k as f64 / nt as f64;
                sum += prof.nl.dg(u) * (-r * th.sin()).exp() * du * th.sin() * r;
            }
        }
        sum *= dr * 2.0 * std::f64::consts::PI / nt as f64;
        assert!(c > 0.0);
        assert!((c - sum).abs() < 1e-3 * c, "{c} vs {sum}");
    }

    #[test]
    fn empty_chain_reduces_to_projection() {
        let prof = profile();
        let spec = DomainSpec::half_plane();
        let l0 = 3.0;
        let params = ProjectionParams {
            h: 0.1,
            lateral_margin: 4.0,
            top_margin: 4.0,
        };
        let pr = dirichlet_projection(&spec, &prof, l0, &params).unwrap();
        let chain = SpikeChain::symmetric(2, l0, 0.0, 7.0, 0);
        let a = assemble_ansatz(&chain, &pr, &prof, [None, None]).unwrap();
        let mut worst = 0.0f64;
        for &id in &pr.grid.unknowns {
            assert!((a.field.values[id] - pr.ubar.values[id]).abs() < 1e-14);
            let expect = prof.nl.g(pr.ubar.values[id]) - prof.nl.g(pr.u0.values[id]);
            worst = worst.max((a.residual.values[id] - expect).abs());
        }
        assert!(worst < 1e-12);
        // the boundary pushes the spike upward
        assert!(a.measured_force[1] > 0.0);
        assert!(relative_mismatch(a.measured_force, [0.0, pr.phi0_center]) < 0.5);
    }
}
