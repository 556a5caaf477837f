//! Principal eigenvalues of `-Δ + V` on grids, and the experiments built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Operator;
use crate::domain::{build_grid, BoxSpec, DomainSpec, Field, Grid2D, NodeKind, SideBc, SidePolicy};
use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpair, EigenOptions, SymTridiag};

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda: f64,
    /// Positive on the unknowns, maximum 1.
    pub eigenfunction: Field,
    pub iterations: usize,
    /// `‖(-Δ_h + V)ψ - λψ‖∞` with ψ max-normalized.
    pub residual: f64,
}

/// Lowest eigenvalue of `-Δ_h + V` with homogeneous conditions on ∂Ω and on
/// the truncation sides (Dirichlet sides are treated as zero, Neumann sides
/// as reflecting).
pub fn principal_eigenvalue(grid: &Grid2D, potential: &Field, tol: f64) -> Result<EigenResult> {
    let op = Operator::assemble(grid);
    let v = potential.unknown_values(grid);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric("potential is not finite", f64::NAN));
    }
    let a = op.with_potential(&v);
    let pair = lowest_eigenpair(
        &a,
        &op.mass,
        &EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )?;
    if pair.vector.iter().any(|&x| x <= 0.0) {
        return Err(Error::numeric("principal eigenfunction changes sign", pair.residual));
    }
    Ok(EigenResult {
        lambda: pair.value,
        eigenfunction: Field::from_unknowns(grid, &pair.vector, &|_, _| 0.0),
        iterations: pair.iterations,
        residual: pair.residual,
    })
}

/// Gaussian bump `amp · exp(-|x - c|² / w²)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bump {
    pub center: (f64, f64),
    pub width: f64,
    pub amp: f64,
}

impl Bump {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r2 = (x - self.center.0).powi(2) + (y - self.center.1).powi(2);
        self.amp * (-r2 / (self.width * self.width)).exp()
    }
}

/// Bumps with centres in the disk of radius 0.7, widths in `[0.1, 0.4]` and
/// amplitudes of either sign up to `max_amp`.
pub fn random_bumps(count: usize, max_amp: f64, seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = 0.7 * rng.gen::<f64>().sqrt();
            let t = rng.gen::<f64>() * std::f64::consts::TAU;
            Bump {
                center: (r * t.cos(), r * t.sin()),
                width: rng.gen_range(0.1..0.4),
                amp: rng.gen_range(-max_amp..max_amp),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationEntry {
    pub delta: f64,
    pub norm_l1: f64,
    pub norm_lq: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub lambda0: f64,
    pub q: f64,
    pub entries: Vec<PerturbationEntry>,
    /// Smallest `C` with `-C‖V‖_q ≤ λ_V - λ₀ ≤ C‖V‖₁` for every entry.
    pub c_empirical: f64,
    pub c_configured: f64,
    pub violations: usize,
}

/// Grid on the unit disk used by [`eig_perturbation_check`].
pub fn unit_disk_grid(h: f64) -> Result<Grid2D> {
    let half = 1.0 + 2.0 * h;
    build_grid(
        &DomainSpec::disk((0.0, 0.0), 1.0)?,
        h,
        BoxSpec::new(-half, half, -half, half),
        SidePolicy::uniform(SideBc::Zero),
    )
}

/// Compares `λ(-Δ + V, B₁) - λ(-Δ, B₁)` with the `L¹` and `L^q` norms of each `V`.
pub fn eig_perturbation_check(
    potentials: &[&dyn Fn(f64, f64) -> f64],
    q: f64,
    h: f64,
    c_configured: f64,
    tol: f64,
) -> Result<PerturbationReport> {
    let grid = unit_disk_grid(h)?;
    let op = Operator::assemble(&grid);
    let lambda0 = principal_eigenvalue(&grid, &Field::zeros(&grid), tol)?.lambda;
    let mut entries = Vec::with_capacity(potentials.len());
    let mut c_emp: f64 = 0.0;
    let mut violations = 0;
    for v in potentials {
        let field = Field::from_fn(&grid, |x, y| v(x, y));
        let lam = principal_eigenvalue(&grid, &field, tol)?.lambda;
        let vals = field.unknown_values(&grid);
        let norm_l1: f64 = vals.iter().zip(&op.mass).map(|(a, m)| a.abs() * m).sum();
        let norm_lq = vals
            .iter()
            .zip(&op.mass)
            .map(|(a, m)| a.abs().powf(q) * m)
            .sum::<f64>()
            .powf(1.0 / q);
        let delta = lam - lambda0;
        let need = if delta > 0.0 {
            delta / norm_l1
        } else if delta < 0.0 {
            -delta / norm_lq
        } else {
            0.0
        };
        c_emp = c_emp.max(need);
        if need > c_configured {
            violations += 1;
        }
        entries.push(PerturbationEntry { delta, norm_l1, norm_lq });
    }
    Ok(PerturbationReport {
        lambda0,
        q,
        entries,
        c_empirical: c_emp,
        c_configured,
        violations,
    })
}

fn slab_fraction(y: f64, h: f64, eta: f64) -> f64 {
    let lo = (y - 0.5 * h).max(-0.5 * eta);
    let hi = (y + 0.5 * h).min(0.5 * eta);
    ((hi - lo) / h).max(0.0)
}

/// `λ(-Δ + a 1_S)` for the horizontal slab `S = {|y| < η/2}` in a reflecting
/// box of side `R`.
///
/// The eigenfunction of a horizontal slab problem in a Neumann box does not
/// depend on x, so the problem reduces exactly to `-ψ'' + a 1_S ψ = λψ` on
/// `[-R/2, R/2]`. Cells cut by the slab carry the covered fraction of `a`.
pub fn thin_set_eigenvalue(a: f64, eta: f64, r_box: f64, h: f64) -> Result<f64> {
    if !(eta > 0.0 && r_box > eta && h > 0.0) {
        return Err(Error::Domain("need 0 < η < R and h > 0".into()));
    }
    let n = (r_box / h).round() as usize + 1;
    let h = r_box / (n - 1) as f64;
    let mass: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h })
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n - 1];
    for j in 0..n {
        let y = -0.5 * r_box + j as f64 * h;
        let frac = if j == 0 || j == n - 1 {
            let inner = if j == 0 { y + 0.25 * h } else { y - 0.25 * h };
            slab_fraction(inner, 0.5 * h, eta)
        } else {
            slab_fraction(y, h, eta)
        };
        d[j] = a * frac * mass[j];
    }
    for j in 0..n - 1 {
        d[j] += 1.0 / h;
        d[j + 1] += 1.0 / h;
        e[j] = -1.0 / h;
    }
    // symmetrize with M^{-1/2}
    for j in 0..n {
        d[j] /= mass[j];
    }
    for j in 0..n - 1 {
        e[j] /= (mass[j] * mass[j + 1]).sqrt();
    }
    Ok(SymTridiag::new(d, e).eigenvalue(0))
}

/// The same eigenvalue computed on a two-dimensional Neumann box; used to
/// confirm the one-dimensional reduction.
pub fn thin_set_eigenvalue_2d(a: f64, eta: f64, r_box: f64, h: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * r_box;
    let grid = build_grid(
        &DomainSpec::full_space(),
        h,
        BoxSpec::new(-half, half, -half, half),
        SidePolicy::uniform(SideBc::Neumann),
    )?;
    let mut v = Field::zeros(&grid);
    for id in 0..grid.len() {
        if grid.kinds[id] == NodeKind::Exterior {
            continue;
        }
        let (_, j) = grid.ij(id);
        let (_, y) = grid.coords(id);
        let frac = if j == 0 {
            slab_fraction(y + 0.25 * h, 0.5 * h, eta)
        } else if j == grid.ny - 1 {
            slab_fraction(y - 0.25 * h, 0.5 * h, eta)
        } else {
            slab_fraction(y, h, eta)
        };
        v.values[id] = a * frac;
    }
    Ok(principal_eigenvalue(&grid, &v, tol)?.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(h: f64) -> Grid2D {
        build_grid(
            &DomainSpec::full_space(),
            h,
            BoxSpec::new(0.0, 1.0, 0.0, 1.0),
            SidePolicy::uniform(SideBc::Zero),
        )
        .unwrap()
    }

    #[test]
    fn unit_square_dirichlet() {
        let g = square(0.02);
        let r = principal_eigenvalue(&g, &Field::zeros(&g), 1e-9).unwrap();
        // 5-point stencil: 2 · (4/h²) sin²(πh/2)
        let exact_discrete = 8.0 / (0.02f64 * 0.02) * (PI * 0.01).sin().powi(2);
        assert!((r.lambda - exact_discrete).abs() < 1e-6 * exact_discrete);
        assert!((r.lambda - 2.0 * PI * PI).abs() < 0.02);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn constant_shift_is_exact() {
        let g = square(0.05);
        let base = principal_eigenvalue(&g, &Field::zeros(&g), 1e-10).unwrap().lambda;
        let shifted = principal_eigenvalue(&g, &Field::from_fn(&g, |_, _| 3.25), 1e-10).unwrap().lambda;
        assert!((shifted - base - 3.25).abs() < 1e-8);
    }

    #[test]
    fn long_strip_matches_slab() {
        let mu = 1.5;
        let mut pol = SidePolicy::uniform(SideBc::Neumann);
        pol.top = SideBc::Zero;
        pol.bottom = SideBc::Zero;
        let g = build_grid(&DomainSpec::full_space(), 0.025, BoxSpec::new(0.0, 6.0, 0.0, mu), pol).unwrap();
        let r = principal_eigenvalue(&g, &Field::zeros(&g), 1e-9).unwrap();
        assert!((r.lambda - PI * PI / (mu * mu)).abs() < 2e-3, "{}", r.lambda);
    }

    #[test]
    fn enlarging_box_lowers_eigenvalue() {
        let v = |x: f64, y: f64| -2.0 * (-(x * x + y * y)).exp();
        let mut last = f64::INFINITY;
        for half in [1.0, 1.5, 2.0, 3.0] {
            let g = build_grid(
                &DomainSpec::half_plane(),
                0.1,
                BoxSpec::new(-half, half, 0.0, 2.0 * half),
                SidePolicy::uniform(SideBc::Zero),
            )
            .unwrap();
            let lam = principal_eigenvalue(&g, &Field::from_fn(&g, |x, y| v(x, y - 1.0)), 1e-9)
                .unwrap()
                .lambda;
            assert!(lam <= last + 1e-10);
            last = lam;
        }
    }

    #[test]
    fn perturbation_identities() {
        let zero = |_: f64, _: f64| 0.0;
        let eps = |_: f64, _: f64| 0.3;
        let rep = eig_perturbation_check(&[&zero, &eps], 1.5, 0.05, 10.0, 1e-10).unwrap();
        assert!(rep.entries[0].delta.abs() < 1e-9);
        assert!((rep.entries[1].delta - 0.3).abs() < 1e-8);
        // λ₀ of the unit disk is j₀,₁² ≈ 5.7832
        assert!((rep.lambda0 - 5.783_185_96).abs() < 0.05, "{}", rep.lambda0);
    }

    #[test]
    fn thin_set_reduction_agrees_with_grid() {
        let (a, eta, r, h) = (-6.0, 0.3, 8.0, 0.1);
        let one = thin_set_eigenvalue(a, eta, r, h).unwrap();
        let two = thin_set_eigenvalue_2d(a, eta, r, h, 1e-10).unwrap();
        assert!((one - two).abs() < 1e-7, "{one} {two}");
    }

    #[test]
    fn thin_set_signs() {
        assert!(thin_set_eigenvalue(0.0, 0.2, 20.0, 0.01).unwrap().abs() < 1e-10);
        assert!(thin_set_eigenvalue(4.0, 0.2, 20.0, 0.01).unwrap() >= 0.0);
        let mut last = f64::INFINITY;
        let mut eta = 0.5;
        for _ in 0..5 {
            let lam = thin_set_eigenvalue(-6.0, eta, 20.0, 0.005).unwrap();
            assert!(lam < 0.0 && lam.abs() < last);
            last = lam.abs();
            eta *= 0.5;
        }
    }
}
