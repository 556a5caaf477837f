//! Dirichlet projection of a ground state centred at `z₀ = (0, L₀)`.
//!
//! The correction `φ₀ = U₀ - Ū₀` solves `-Δφ₀ + φ₀ = 0` in Ω with `φ₀ = U₀`
//! on ∂Ω. It is computed directly: `φ₀(z₀)` is of order `e^{-2L₀}`, far below
//! the size of `U₀` near the centre, and forming it as a difference of two
//! `O(1)` fields would lose it to rounding.

use serde::Serialize;

use super::helmholtz::solve_shifted;
use crate::domain::{build_grid, BoxSpec, DomainKind, DomainSpec, Field, Grid2D, NodeKind, SideBc, SidePolicy};
use crate::error::{Error, Result};
use crate::linalg::CgOptions;
use crate::radial::RadialProfile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProjectionParams {
    pub h: f64,
    /// Box half-width is `2 L₀ + lateral_margin`.
    pub lateral_margin: f64,
    /// Box top is `L₀ + top_margin`.
    pub top_margin: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            h: 0.1,
            lateral_margin: 8.0,
            top_margin: 8.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub grid: Grid2D,
    pub u0: Field,
    pub ubar: Field,
    pub phi0: Field,
    pub center: (f64, f64),
    pub phi0_center: f64,
    /// `max |Ū₀| / U₀` over nodes in Ω.
    pub comparison_constant: f64,
    /// Smallest value of φ₀ over the unknowns.
    pub phi0_min: f64,
    pub cg_iterations: usize,
}

fn snap_down(v: f64, h: f64) -> f64 {
    (v / h).floor() * h
}

fn snap_up(v: f64, h: f64) -> f64 {
    (v / h).ceil() * h
}

fn projection_box(spec: &DomainSpec, l0: f64, p: &ProjectionParams) -> BoxSpec {
    let h = p.h;
    let half = snap_up(2.0 * l0 + p.lateral_margin, h);
    let top = snap_up(l0 + p.top_margin, h);
    let bottom = match &spec.kind {
        DomainKind::Epigraph(_) => {
            let n = (2.0 * half / h).round() as usize;
            let lo = (0..=n)
                .map(|i| spec.phi(-half + i as f64 * h).unwrap())
                .fold(f64::INFINITY, f64::min);
            snap_down(lo, h) - h
        }
        _ => -half,
    };
    BoxSpec::new(-half, half, bottom, top)
}

/// Projects `U(|x - z₀|)` onto functions vanishing on ∂Ω.
pub fn dirichlet_projection(
    spec: &DomainSpec,
    profile: &RadialProfile,
    l0: f64,
    params: &ProjectionParams,
) -> Result<ProjectionResult> {
    if profile.d != 2 {
        return Err(Error::UnsupportedDimension(profile.d));
    }
    let center = (0.0, l0);
    if !spec.contains(center.0, center.1) {
        return Err(Error::Geometry(format!("spike centre (0, {l0}) lies outside the domain")));
    }
    let bx = projection_box(spec, l0, params);
    let grid = build_grid(spec, params.h, bx, SidePolicy::uniform(SideBc::Zero))?;
    let u_at = |x: f64, y: f64| profile.value(((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt());
    let n = grid.n_unknowns();
    let opts = CgOptions {
        rel_tol: 1e-12,
        ..CgOptions::default()
    };
    // Truncation sides are Zero: φ₀ is set to 0 there, which is what `U₀ ≈ 0` means far away.
    let sol = solve_shifted(&grid, &vec![1.0; n], &u_at, &vec![0.0; n], &opts)?;
    let phi0 = sol.field;
    let u0 = Field::from_fn(&grid, u_at);
    let mut ubar = Field::zeros(&grid);
    let mut comparison: f64 = 0.0;
    for id in 0..grid.len() {
        if grid.kinds[id] != NodeKind::Exterior {
            ubar.values[id] = u0.values[id] - phi0.values[id];
            if u0.values[id] > 0.0 {
                comparison = comparison.max(ubar.values[id].abs() / u0.values[id]);
            }
        }
    }
    let phi0_min = grid
        .unknowns
        .iter()
        .map(|&id| phi0.values[id])
        .fold(f64::INFINITY, f64::min);
    let phi0_center = phi0
        .interpolate(center.0, center.1)
        .ok_or_else(|| Error::Geometry("spike centre outside the grid box".into()))?;
    Ok(ProjectionResult {
        grid,
        u0,
        ubar,
        phi0,
        center,
        phi0_center,
        comparison_constant: comparison,
        phi0_min,
        cg_iterations: sol.stats.iterations,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileDeviation {
    /// `max |φ₀(x + z₀)/φ₀(z₀) e^{y} - 1|` over the ball.
    pub max_deviation: f64,
    /// `max |∂ₓφ₀| e^{y} / φ₀(z₀)` over the ball.
    pub max_gradient: f64,
    pub radius: f64,
    pub nodes: usize,
}

/// Compares φ₀ near the spike centre with the pure exponential `φ₀(z₀) e^{-y}`
/// on the ball of radius `L₀^{1/3}`.
pub fn exponential_profile_check(pr: &ProjectionResult, l0: f64) -> Result<ProfileDeviation> {
    let g = &pr.grid;
    let radius = l0.cbrt();
    let mut out = ProfileDeviation {
        max_deviation: 0.0,
        max_gradient: 0.0,
        radius,
        nodes: 0,
    };
    for id in 0..g.len() {
        let (x, y) = g.coords(id);
        let (dx, dy) = (x - pr.center.0, y - pr.center.1);
        if dx * dx + dy * dy > radius * radius + 1e-12 {
            continue;
        }
        let (i, j) = g.ij(id);
        if g.kinds[id] != NodeKind::Interior || i == 0 || i + 1 == g.nx {
            return Err(Error::Geometry("ball around the spike centre leaves the grid".into()));
        }
        let w = dy.exp() / pr.phi0_center;
        let ratio = pr.phi0.values[id] * w;
        let grad = (pr.phi0.at(i + 1, j) - pr.phi0.at(i - 1, j)) / (2.0 * g.h);
        out.max_deviation = out.max_deviation.max((ratio - 1.0).abs());
        out.max_gradient = out.max_gradient.max(grad.abs() * w);
        out.nodes += 1;
    }
    Ok(out)
}

/// The one-dimensional analogue on the half-line `y > 0` with the spike at `L₀`.
#[derive(Clone, Debug)]
pub struct HalfLineProjection {
    pub h: f64,
    pub l0: f64,
    /// φ₀ at `y = j h`.
    pub phi0: Vec<f64>,
    pub phi0_center: f64,
}

/// φ₀ on the half-line is the decaying solution `U(L₀) e^{-y}`.
pub fn half_line_projection(profile: &RadialProfile, l0: f64, h: f64, y_max: f64) -> Result<HalfLineProjection> {
    if profile.d != 1 {
        return Err(Error::UnsupportedDimension(profile.d));
    }
    let boundary = profile.value(l0);
    let n = (y_max / h).round() as usize;
    let phi0: Vec<f64> = (0..=n).map(|j| boundary * (-(j as f64) * h).exp()).collect();
    Ok(HalfLineProjection {
        h,
        l0,
        phi0,
        phi0_center: boundary * (-l0).exp(),
    })
}

impl HalfLineProjection {
    /// Largest `|φ₀(L₀ + y)/φ₀(L₀) e^{y} - 1|` for `|y| ≤ L₀^{1/3}`.
    pub fn exponential_deviation(&self) -> f64 {
        let r = self.l0.cbrt();
        self.phi0
            .iter()
            .enumerate()
            .filter_map(|(j, &v)| {
                let y = j as f64 * self.h - self.l0;
                (y.abs() <= r).then(|| (v / self.phi0_center * y.exp() - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::Nonlinearity;
    use crate::radial::{shoot_ground_state, ShootingOptions};

    fn profile(d: usize) -> RadialProfile {
        let nl = Nonlinearity::power_field(2.0).unwrap();
        shoot_ground_state(&nl, d, &ShootingOptions::default()).unwrap()
    }

    #[test]
    fn half_line_matches_closed_form() {
        let p = profile(1);
        let l0 = 5.0;
        let hp = half_line_projection(&p, l0, 0.01, 20.0).unwrap();
        assert!(hp.exponential_deviation() < 1e-12);
        let approx = p.amplitude * (-2.0 * l0).exp();
        // U(L₀) = A e^{-L₀}(1 + O(e^{-L₀})) for this profile
        assert!((hp.phi0_center / approx - 1.0).abs() < 3.0 * (-l0).exp());
        // independent route: discrete two-point solve of -φ'' + φ = 0
        let n = hp.phi0.len();
        let h = hp.h;
        let diag = 2.0 + h * h;
        let mut c = vec![0.0; n];
        let mut dvec = vec![0.0; n];
        c[1] = -1.0 / diag;
        dvec[1] = hp.phi0[0] / diag;
        for j in 2..n - 1 {
            let m = diag + c[j - 1];
            c[j] = -1.0 / m;
            dvec[j] = dvec[j - 1] / m;
        }
        let mut sol = vec![0.0; n];
        sol[0] = hp.phi0[0];
        for j in (1..n - 1).rev() {
            sol[j] = dvec[j] - c[j] * sol[j + 1];
        }
        let jc = (l0 / h).round() as usize;
        assert!((sol[jc] / hp.phi0[jc] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn half_plane_projection_is_positive_and_exponential() {
        let p = profile(2);
        let l0 = 3.0;
        let pr = dirichlet_projection(&DomainSpec::half_plane(), &p, l0, &ProjectionParams::default()).unwrap();
        assert!(pr.phi0_min > 0.0);
        assert!(pr.comparison_constant.is_finite());
        let dev = exponential_profile_check(&pr, l0).unwrap();
        assert!(dev.nodes > 100);
        assert!(dev.max_deviation < 1.0);
    }

    #[test]
    fn exterior_centre_is_rejected() {
        let p = profile(2);
        let r = dirichlet_projection(&DomainSpec::half_plane(), &p, -1.0, &ProjectionParams::default());
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}
