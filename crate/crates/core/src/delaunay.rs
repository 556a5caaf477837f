//! Solutions periodic in y with a single spike per period.
//!
//! The fundamental cell is `|y| ≤ L/2` with Neumann conditions at `y = ±L/2`.
//! In one dimension the cell is an interval; in two dimensions it is the strip
//! `0 ≤ x ≤ X` (Neumann at the symmetry line `x = 0`, zero at `x = X`).
//!
//! The residue is measured against the chain `Σ_k U(y - kL)`. To keep the
//! discretization error of the ground state out of the comparison, the 1D
//! chain is built from a reference spike solved on the same grid spacing; the
//! 2D chain uses the radial profile, so its residue has an `O(h²)` floor.

use serde::Serialize;

use crate::domain::{build_grid, BoxSpec, DomainSpec, Field, Grid2D, SideBc, SidePolicy};
use crate::elliptic::{solve_semilinear, EigenResult, NewtonOptions, NewtonSolution, Operator};
use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpair, norm_inf, Csr, EigenOptions, TripletBuilder};
use crate::nonlin::Nonlinearity;
use crate::radial::RadialProfile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DelaunayParams {
    /// Grid spacing; defaults to 0.01 in 1D and 0.1 in 2D.
    pub h: Option<f64>,
    /// Truncation radius in x; defaults to `max(15, L)`.
    pub x_radius: Option<f64>,
    pub l_min: f64,
    /// Chain terms `|k| ≤ images` in the initial guess and the residue.
    pub images: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Also run Newton from 1.2 times the chain and compare.
    pub check_uniqueness: bool,
}

impl Default for DelaunayParams {
    fn default() -> Self {
        DelaunayParams {
            h: None,
            x_radius: None,
            l_min: 6.0,
            images: 3,
            newton_tol: 1e-10,
            max_newton: 40,
            check_uniqueness: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DelaunaySolution {
    pub d: usize,
    pub period: f64,
    pub h: f64,
    /// In 1D a single column (`nx = 1`) over `y ∈ [-L/2, L/2]`.
    pub field: Field,
    pub grid: Option<Grid2D>,
    /// `‖u_L - Σ_k U(· - k L e_y)‖∞` over the cell.
    pub residue: f64,
    /// `‖u_L - U‖∞` over the cell.
    pub raw_residue: f64,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    /// `max |u_L(x, y) - u_L(x, -y)|`.
    pub evenness_defect: f64,
    pub min_value: f64,
    /// `‖u - u'‖∞` between the runs from the chain and from 1.2 times the chain.
    pub uniqueness_gap: Option<f64>,
    nl: Nonlinearity,
    stiffness: Csr,
    mass: Vec<f64>,
    /// Unknown values in solver order.
    u: Vec<f64>,
    /// Node id of each unknown (1D: the row index).
    nodes: Vec<usize>,
}

/// Tridiagonal `-d²/dy²` on nodes `0..n` with spacing `h`. A Dirichlet end
/// has its zero node one spacing beyond the last unknown.
fn line_operator(n: usize, h: f64, left_neumann: bool, right_neumann: bool) -> (Csr, Vec<f64>) {
    let mut tb = TripletBuilder::new(n);
    for j in 0..n - 1 {
        tb.add(j, j, 1.0 / h);
        tb.add(j + 1, j + 1, 1.0 / h);
        tb.add(j, j + 1, -1.0 / h);
        tb.add(j + 1, j, -1.0 / h);
    }
    if !left_neumann {
        tb.add(0, 0, 1.0 / h);
    }
    if !right_neumann {
        tb.add(n - 1, n - 1, 1.0 / h);
    }
    let mut mass = vec![h; n];
    if left_neumann {
        mass[0] = 0.5 * h;
    }
    if right_neumann {
        mass[n - 1] = 0.5 * h;
    }
    (tb.build(), mass)
}

/// Discrete even ground state at `y = m h`, `0 ≤ m < cells`, zero at `y = cells·h`.
///
/// Solving on the half-line removes the translation mode, which would
/// otherwise make the Jacobian nearly singular.
fn reference_spike_1d(profile: &RadialProfile, h: f64, cells: usize, opts: &NewtonOptions) -> Result<Vec<f64>> {
    let (k, mass) = line_operator(cells, h, true, false);
    let start: Vec<f64> = (0..cells).map(|m| profile.value(m as f64 * h)).collect();
    let sol = solve_semilinear(&k, &mass, &vec![0.0; cells], &profile.nl, &start, opts)?;
    Ok(sol.u)
}

/// Solves for the periodic solution of period `l`.
///
/// The solution is sought among functions even in y (and in x in 2D), so the
/// solve runs on the half cell `0 ≤ y ≤ L/2` and is mirrored. The odd
/// translation mode is nearly null for large `L`; excluding it keeps Newton
/// well conditioned.
pub fn solve_delaunay(profile: &RadialProfile, l: f64, params: &DelaunayParams) -> Result<DelaunaySolution> {
    if l < params.l_min {
        return Err(Error::Geometry(format!("period {l} below the minimum {}", params.l_min)));
    }
    match profile.d {
        1 => solve_1d(profile, l, params),
        2 => solve_2d(profile, l, params),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn newton_opts(params: &DelaunayParams) -> NewtonOptions {
    NewtonOptions {
        tol: params.newton_tol,
        max_iter: params.max_newton,
    }
}

fn diverged_hint(e: Error, l: f64) -> Error {
    match e {
        Error::NewtonDiverged(msg) => Error::NewtonDiverged(format!("{msg}; period {l} may be below the existence threshold")),
        other => other,
    }
}

/// Half-cell Newton solve, optionally repeated from 1.2 times the start.
fn newton_pair(
    k: &Csr,
    mass: &[f64],
    nl: &Nonlinearity,
    start: &[f64],
    params: &DelaunayParams,
    l: f64,
) -> Result<(NewtonSolution, Option<f64>)> {
    let opts = newton_opts(params);
    let b = vec![0.0; start.len()];
    let sol = solve_semilinear(k, mass, &b, nl, start, &opts).map_err(|e| diverged_hint(e, l))?;
    let gap = if params.check_uniqueness {
        let scaled: Vec<f64> = start.iter().map(|v| 1.2 * v).collect();
        let other = solve_semilinear(k, mass, &b, nl, &scaled, &opts).map_err(|e| diverged_hint(e, l))?;
        Some(sup_diff(&sol.u, &other.u))
    } else {
        None
    };
    Ok((sol, gap))
}

fn even_cells(l: f64, h: f64) -> (usize, f64) {
    let cells = (l / h).round().max(4.0) as usize;
    let cells = cells + cells % 2;
    (cells, l / cells as f64)
}

fn solve_1d(profile: &RadialProfile, l: f64, params: &DelaunayParams) -> Result<DelaunaySolution> {
    let (cells, h) = even_cells(l, params.h.unwrap_or(0.01));
    let half = cells / 2;
    let opts = newton_opts(params);

    let ref_cells = (params.images + 1) * cells + (12.0 / h).ceil() as usize;
    let reference = reference_spike_1d(profile, h, ref_cells, &opts)?;
    // node offsets are integers: y = m h
    let ref_at = |m: i64| -> f64 { reference.get(m.unsigned_abs() as usize).copied().unwrap_or(0.0) };
    let kk = params.images as i64;
    let chain_at = |m: i64| -> f64 { (-kk..=kk).map(|k| ref_at(m - k * cells as i64)).sum() };

    let (kh, mh) = line_operator(half + 1, h, true, true);
    let start: Vec<f64> = (0..=half as i64).map(chain_at).collect();
    let (sol, uniqueness_gap) = newton_pair(&kh, &mh, &profile.nl, &start, params, l)?;

    let n = cells + 1;
    let offset = |j: usize| j as i64 - half as i64;
    let u: Vec<f64> = (0..n).map(|j| sol.u[offset(j).unsigned_abs() as usize]).collect();
    let chain: Vec<f64> = (0..n).map(|j| chain_at(offset(j))).collect();
    let single: Vec<f64> = (0..n).map(|j| ref_at(offset(j))).collect();
    let (k, mass) = line_operator(n, h, true, true);
    let field = Field {
        nx: 1,
        ny: n,
        h,
        origin: (0.0, -0.5 * l),
        values: u.clone(),
        tag: SidePolicy::uniform(SideBc::Neumann),
    };
    Ok(DelaunaySolution {
        d: 1,
        period: l,
        h,
        field,
        grid: None,
        residue: sup_diff(&u, &chain),
        raw_residue: sup_diff(&u, &single),
        newton_iterations: sol.iterations,
        newton_residual: sol.residual,
        evenness_defect: (0..n).map(|j| (u[j] - u[n - 1 - j]).abs()).fold(0.0, f64::max),
        min_value: u.iter().copied().fold(f64::INFINITY, f64::min),
        uniqueness_gap,
        nl: profile.nl.clone(),
        stiffness: k,
        mass,
        nodes: (0..n).collect(),
        u,
    })
}

fn solve_2d(profile: &RadialProfile, l: f64, params: &DelaunayParams) -> Result<DelaunaySolution> {
    let (_, h) = even_cells(l, params.h.unwrap_or(0.1));
    let x_max = (params.x_radius.unwrap_or(l.max(15.0)) / h).round() * h;
    let policy = SidePolicy {
        left: SideBc::Neumann,
        right: SideBc::Zero,
        bottom: SideBc::Neumann,
        top: SideBc::Neumann,
    };
    let space = DomainSpec::full_space();
    let half_grid = build_grid(&space, h, BoxSpec::new(0.0, x_max, 0.0, 0.5 * l), policy)?;
    let grid = build_grid(&space, h, BoxSpec::new(0.0, x_max, -0.5 * l, 0.5 * l), policy)?;
    let kk = params.images as i64;
    let chain_at = |x: f64, y: f64| -> f64 {
        (-kk..=kk)
            .map(|k| profile.value((x * x + (y - k as f64 * l).powi(2)).sqrt()))
            .sum()
    };
    let sample = |g: &Grid2D, f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        g.unknowns
            .iter()
            .map(|&id| {
                let (x, y) = g.coords(id);
                f(x, y)
            })
            .collect()
    };
    let hop = Operator::assemble(&half_grid);
    let start = sample(&half_grid, &chain_at);
    let (sol, uniqueness_gap) = newton_pair(&hop.stiffness, &hop.mass, &profile.nl, &start, params, l)?;
    let half_field = Field::from_unknowns(&half_grid, &sol.u, &|_, _| 0.0);

    let mut field = Field::zeros(&grid);
    let jc = grid.ny / 2;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            field.values[grid.id(i, j)] = half_field.at(i, j.abs_diff(jc));
        }
    }
    let u = field.unknown_values(&grid);
    let chain = sample(&grid, &chain_at);
    let single = sample(&grid, &|x, y| profile.value((x * x + y * y).sqrt()));
    let op = Operator::assemble(&grid);
    let mut evenness_defect: f64 = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            evenness_defect = evenness_defect.max((field.at(i, j) - field.at(i, grid.ny - 1 - j)).abs());
        }
    }
    Ok(DelaunaySolution {
        d: 2,
        period: l,
        h,
        residue: sup_diff(&u, &chain),
        raw_residue: sup_diff(&u, &single),
        newton_iterations: sol.iterations,
        newton_residual: sol.residual,
        evenness_defect,
        min_value: u.iter().copied().fold(f64::INFINITY, f64::min),
        uniqueness_gap,
        nl: profile.nl.clone(),
        stiffness: op.stiffness,
        mass: op.mass,
        nodes: grid.unknowns.clone(),
        u,
        field,
        grid: Some(grid),
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl DelaunaySolution {
    /// Values at the unknowns, in solver order.
    pub fn unknowns(&self) -> &[f64] {
        &self.u
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "L": self.period,
            "h": self.h,
            "residue": self.residue,
            "raw_residue": self.raw_residue,
            "newton_iterations": self.newton_iterations,
            "evenness_defect": self.evenness_defect,
        })
    }

    /// Discrete `∂_y u_L` at the unknowns (zero on the Neumann rows).
    fn dy(&self) -> Vec<f64> {
        let f = &self.field;
        self.nodes
            .iter()
            .map(|&id| {
                let (i, j) = (id % f.nx, id / f.nx);
                if j == 0 || j + 1 == f.ny {
                    0.0
                } else {
                    (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * self.h)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct InstabilityReport {
    pub eigen: EigenResult,
    /// `‖(-Δ_h - f'(u_L)) ∂_y u_L‖∞ / ‖∂_y u_L‖∞`.
    pub null_residual: f64,
    /// Whether `∂_y u_L` takes both signs.
    pub null_sign_changing: bool,
}

/// Principal eigenvalue of `-Δ - f'(u_L)` on the fundamental cell.
pub fn delaunay_instability(sol: &DelaunaySolution, tol: f64) -> Result<InstabilityReport> {
    linearized_eigen(sol, &sol.u, tol)
}

/// As [`delaunay_instability`] but linearizing about `u` (same layout as the solution).
pub fn linearized_eigen(sol: &DelaunaySolution, u: &[f64], tol: f64) -> Result<InstabilityReport> {
    let pot: Vec<f64> = u.iter().map(|&v| -sol.nl.df(v)).collect();
    let mpot: Vec<f64> = pot.iter().zip(&sol.mass).map(|(p, m)| p * m).collect();
    let a = sol.stiffness.add_diagonal(&mpot);
    let pair = lowest_eigenpair(&a, &sol.mass, &EigenOptions { tol, ..EigenOptions::default() })?;
    if pair.vector.iter().any(|&v| v <= 0.0) {
        return Err(Error::numeric("principal eigenfunction changes sign", pair.residual));
    }
    let mut ef = sol.field.map(|_| 0.0);
    for (k, &id) in sol.nodes.iter().enumerate() {
        ef.values[id] = pair.vector[k];
    }
    // ∂_y u_L is odd about y = ±L/2, so it is measured against the periodic
    // operator: rows on the Neumann lines, where it vanishes, are skipped.
    let v = sol.dy();
    let av = a.apply(&v);
    let ny = sol.field.ny;
    let nx = sol.field.nx;
    let r: Vec<f64> = av
        .iter()
        .zip(&sol.mass)
        .zip(&sol.nodes)
        .filter(|(_, &id)| id / nx != 0 && id / nx != ny - 1)
        .map(|((x, m), _)| x / m)
        .collect();
    let vmax = norm_inf(&v);
    Ok(InstabilityReport {
        eigen: EigenResult {
            lambda: pair.value,
            eigenfunction: ef,
            iterations: pair.iterations,
            residual: pair.residual,
        },
        null_residual: if vmax > 0.0 { norm_inf(&r) / vmax } else { 0.0 },
        null_sign_changing: v.iter().any(|&x| x > 0.0) && v.iter().any(|&x| x < 0.0),
    })
}

/// Least-squares slope of `log y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{shoot_ground_state, ShootingOptions};

    fn cubic(d: usize) -> RadialProfile {
        shoot_ground_state(&Nonlinearity::power_field(3.0).unwrap(), d, &ShootingOptions::default()).unwrap()
    }

    /// Periodic BVP oracle: RK4 shooting of u'' = u - u³ from a peak at y = 0,
    /// bisecting on u(0) until u'(L/2) = 0 at the first trough.
    fn periodic_peak(l: f64) -> f64 {
        let rhs = |u: f64| u - u * u * u;
        let end_slope = |u0: f64| {
            let n = 20000;
            let h = 0.5 * l / n as f64;
            let (mut u, mut v) = (u0, 0.0);
            for _ in 0..n {
                let (k1u, k1v) = (v, rhs(u));
                let (k2u, k2v) = (v + 0.5 * h * k1v, rhs(u + 0.5 * h * k1u));
                let (k3u, k3v) = (v + 0.5 * h * k2v, rhs(u + 0.5 * h * k2u));
                let (k4u, k4v) = (v + h * k3v, rhs(u + h * k3u));
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
            v
        };
        // Close to √2 the half period exceeds L/2 (slope still negative);
        // moving away it shrinks until the trough is passed.
        let s2 = 2f64.sqrt();
        let mut b = s2 - 1e-14;
        let mut a = b;
        for k in 1..200 {
            a = s2 - 1e-14 * 1.25f64.powi(k);
            if end_slope(a) > 0.0 {
                break;
            }
            b = a;
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if end_slope(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn one_dimensional_peak_near_soliton() {
        let sol = solve_delaunay(&cubic(1), 20.0, &DelaunayParams::default()).unwrap();
        let peak = sol.field.values[sol.field.ny / 2];
        assert!((peak - 2f64.sqrt()).abs() < 1e-3);
        assert!((peak - periodic_peak(20.0)).abs() < 1e-4, "{peak} {}", periodic_peak(20.0));
        assert!(sol.evenness_defect < 1e-8);
        assert!(sol.min_value > 0.0);
        assert!(sol.uniqueness_gap.unwrap() < 1e-8);
    }

    #[test]
    fn residue_decays_with_period() {
        let p = cubic(1);
        let ls = [8.0, 10.0, 12.0];
        let res: Vec<f64> = ls
            .iter()
            .map(|&l| solve_delaunay(&p, l, &DelaunayParams::default()).unwrap().residue)
            .collect();
        assert!(res[0] > res[1] && res[1] > res[2]);
        assert!(log_slope(&ls, &res) <= -0.5);
    }

    #[test]
    fn one_dimensional_instability() {
        let sol = solve_delaunay(&cubic(1), 12.0, &DelaunayParams::default()).unwrap();
        let rep = delaunay_instability(&sol, 1e-9).unwrap();
        assert!(rep.eigen.lambda <= -1e-3);
        assert!(rep.null_sign_changing);
        assert!(rep.null_residual < 1e-3, "{}", rep.null_residual);
        let free = linearized_eigen(&sol, &vec![0.0; sol.unknowns().len()], 1e-10).unwrap();
        assert!((free.eigen.lambda - 1.0).abs() < 1e-8);
    }

    #[test]
    fn short_period_is_rejected() {
        assert!(solve_delaunay(&cubic(1), 3.0, &DelaunayParams::default()).is_err());
    }

    #[test]
    fn log_slope_of_exponential() {
        let x = [1.0f64, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-0.7 * *v).exp()).collect();
        assert!((log_slope(&x, &y) + 0.7).abs() < 1e-12);
    }
}
