//! Semi-implicit stepping: `(M/dt + K) u⁺ = M u/dt + M f(u) + b`.
//!
//! The diffusion solve is an M-matrix inverse and `u ↦ u + dt f(u)` is
//! increasing once `dt ≤ 1/Lip f`, so each step preserves nodewise order.

use serde::Serialize;

use super::diagnostics::monotonicity_check;
use crate::domain::{build_grid, BoxSpec, DomainKind, DomainSpec, Field, Grid2D, SideBc, SidePolicy};
use crate::elliptic::Operator;
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, BandedLu, Csr};
use crate::nonlin::{Family, Nonlinearity};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepParams {
    pub h: f64,
    /// The box spans `|x| ≤ half_width`.
    pub half_width: f64,
    /// The box spans `height` above the lowest boundary point.
    pub height: f64,
    pub lateral: SideBc,
    /// Top side; `None` picks one for bistable terms and zero otherwise.
    pub top: Option<SideBc>,
    /// `None` means `0.5 / Lip f`.
    pub dt: Option<f64>,
    /// Stop once `max |u⁺ - u| / dt` falls below this.
    pub steady_tol: f64,
    pub t_max: f64,
    /// Steps between recorded time-series rows.
    pub record_every: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            h: 0.25,
            half_width: 8.0,
            height: 16.0,
            lateral: SideBc::Neumann,
            top: None,
            dt: None,
            steady_tol: 1e-9,
            t_max: 4000.0,
            record_every: 25,
        }
    }
}

impl SweepParams {
    /// The same run on a box twice as wide and twice as tall.
    pub fn doubled(&self) -> Self {
        SweepParams {
            half_width: 2.0 * self.half_width,
            height: 2.0 * self.height,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub max_dt: f64,
    pub sup_u: f64,
    pub min_dy_u: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub grid: Grid2D,
    pub field: Field,
    pub time: f64,
    pub steps: usize,
    pub dt: f64,
    /// `max |u⁺ - u| / dt` at the last step.
    pub max_dt: f64,
    pub converged: bool,
    pub direction: Direction,
    /// Largest step against `direction` (zero when monotone).
    pub monotonicity_violation: f64,
    /// Largest excursion outside `[0, 1]` over the run.
    pub range_violation: f64,
    /// Largest `u(t) - reference` over recorded times, when a reference was given.
    pub comparison_excess: Option<f64>,
    /// `max |Δ_h u + f(u)|` of the final state.
    pub pde_residual: f64,
    pub series: Vec<SeriesRow>,
}

impl SweepResult {
    pub fn monotone(&self) -> bool {
        self.monotonicity_violation <= 1e-12
    }

    pub fn sup(&self) -> f64 {
        self.field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn series_csv(&self) -> String {
        let mut s = String::from("t,max_dt,sup_u,min_dy_u\n");
        for r in &self.series {
            s.push_str(&format!("{},{},{},{}\n", r.t, r.max_dt, r.sup_u, r.min_dy_u));
        }
        s
    }
}

/// Box grid for an epigraph: `|x| ≤ W`, from just below the lowest boundary
/// point up to `height` above it.
pub fn sweep_grid(spec: &DomainSpec, nl: &Nonlinearity, params: &SweepParams) -> Result<Grid2D> {
    if !nl.is_normalized() {
        return Err(Error::InvalidNonlinearity("sweeps expect f'(0) = -1".into()));
    }
    if !matches!(spec.kind, DomainKind::Epigraph(_)) {
        return Err(Error::Domain(format!("sweeps need an epigraph, got {}", spec.describe())));
    }
    let h = params.h;
    let w = (params.half_width / h).round() * h;
    let n = (2.0 * w / h).round() as usize;
    let low = (0..=n)
        .filter_map(|i| spec.phi(-w + i as f64 * h))
        .fold(f64::INFINITY, f64::min);
    let y0 = (low / h).floor() * h;
    let y1 = y0 + (params.height / h).round() * h;
    let top = params.top.unwrap_or(match nl.family() {
        Some(Family::Bistable) => SideBc::One,
        _ => SideBc::Zero,
    });
    let policy = SidePolicy {
        left: params.lateral,
        right: params.lateral,
        bottom: SideBc::Zero,
        top,
    };
    build_grid(spec, h, BoxSpec::new(-w, w, y0, y1), policy)
}

fn default_dt(nl: &Nonlinearity) -> f64 {
    let top = nl.positive_roots().last().copied().unwrap_or(1.0);
    0.5 / nl.lipschitz(0.0, top).max(1e-12)
}

struct Stepper<'a> {
    nl: &'a Nonlinearity,
    k: Csr,
    mass: Vec<f64>,
    b: Vec<f64>,
    lu: BandedLu,
    dt: f64,
}

impl<'a> Stepper<'a> {
    fn new(grid: &Grid2D, nl: &'a Nonlinearity, dt: f64) -> Result<Self> {
        let op = Operator::assemble(grid);
        let shift: Vec<f64> = op.mass.iter().map(|m| m / dt).collect();
        let lu = BandedLu::factor(&op.stiffness.add_diagonal(&shift))?;
        let b = Operator::boundary_rhs(grid, &|_, _| 0.0);
        Ok(Stepper {
            nl,
            k: op.stiffness,
            mass: op.mass,
            b,
            lu,
            dt,
        })
    }

    fn step(&self, u: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = u
            .iter()
            .zip(&self.mass)
            .zip(&self.b)
            .map(|((&v, &m), &b)| m * (v / self.dt + self.nl.f(v)) + b)
            .collect();
        self.lu.solve(&rhs)
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let ku = self.k.apply(u);
        let r: Vec<f64> = (0..u.len())
            .map(|i| (self.b[i] - ku[i]) / self.mass[i] + self.nl.f(u[i]))
            .collect();
        norm_inf(&r)
    }
}

fn run(
    grid: Grid2D,
    nl: &Nonlinearity,
    start: Vec<f64>,
    direction: Direction,
    params: &SweepParams,
    reference: Option<&Field>,
) -> Result<SweepResult> {
    let dt = params.dt.unwrap_or_else(|| default_dt(nl));
    let stepper = Stepper::new(&grid, nl, dt)?;
    let sign = match direction {
        Direction::Nonincreasing => 1.0,
        Direction::Nondecreasing => -1.0,
    };
    let reference: Option<Vec<f64>> = reference.map(|r| r.unknown_values(&grid));
    let mut u = start;
    let mut t = 0.0;
    let mut steps = 0;
    let mut violation = 0.0f64;
    let mut range = 0.0f64;
    let mut excess = reference.as_ref().map(|_| f64::NEG_INFINITY);
    let mut series = Vec::new();
    let mut max_dt = f64::INFINITY;
    let bistable = nl.family() == Some(Family::Bistable);
    let record = |u: &[f64], t: f64, max_dt: f64, series: &mut Vec<SeriesRow>, excess: &mut Option<f64>| {
        let field = Field::from_unknowns(&grid, u, &|_, _| 0.0);
        series.push(SeriesRow {
            t,
            max_dt,
            sup_u: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_dy_u: monotonicity_check(&field, &grid.spec),
        });
        if let (Some(e), Some(r)) = (excess.as_mut(), reference.as_ref()) {
            *e = u.iter().zip(r).map(|(a, b)| a - b).fold(*e, f64::max);
        }
    };
    record(&u, t, f64::NAN, &mut series, &mut excess);
    while t < params.t_max {
        let next = stepper.step(&u);
        steps += 1;
        t += dt;
        let mut worst = 0.0f64;
        for (a, b) in next.iter().zip(&u) {
            worst = worst.max((a - b).abs());
            violation = violation.max(sign * (a - b));
        }
        if bistable {
            for &v in &next {
                range = range.max(-v).max(v - 1.0);
            }
        }
        u = next;
        max_dt = worst / dt;
        let done = max_dt <= params.steady_tol;
        if done || steps % params.record_every.max(1) == 0 {
            record(&u, t, max_dt, &mut series, &mut excess);
        }
        if done {
            break;
        }
    }
    let pde_residual = stepper.residual(&u);
    let field = Field::from_unknowns(&grid, &u, &|_, _| 0.0);
    Ok(SweepResult {
        converged: max_dt <= params.steady_tol,
        grid,
        field,
        time: t,
        steps,
        dt,
        max_dt,
        direction,
        monotonicity_violation: violation,
        range_violation: range,
        comparison_excess: excess,
        pde_residual,
        series,
    })
}

/// Evolves from `u ≡ 1`; the state decreases to the largest steady state below one.
pub fn sweep_from_one(spec: &DomainSpec, nl: &Nonlinearity, params: &SweepParams) -> Result<SweepResult> {
    let grid = sweep_grid(spec, nl, params)?;
    let start = vec![1.0; grid.n_unknowns()];
    run(grid, nl, start, Direction::Nonincreasing, params, None)
}

/// Radial cap `v(r)` solving `-v'' - v'/r = f(v) - ε` from `v(0) = s`,
/// `v'(0) = 0`, up to its first zero `R`. Returns `(R, samples at spacing dr)`,
/// or `None` when the profile turns upward or stays positive up to `r_max`.
pub fn ode_cap(nl: &Nonlinearity, s: f64, eps: f64, dr: f64, r_max: f64) -> Option<(f64, Vec<f64>)> {
    let rhs = |r: f64, v: f64, w: f64| (w, -w / r - (nl.f(v) - eps));
    let g0 = nl.f(s) - eps;
    if g0 <= 0.0 {
        return None;
    }
    let mut r = dr;
    let (mut v, mut w) = (s - g0 * r * r / 4.0, -g0 * r / 2.0);
    let mut table = vec![s, v];
    while r < r_max {
        let k1 = rhs(r, v, w);
        let k2 = rhs(r + 0.5 * dr, v + 0.5 * dr * k1.0, w + 0.5 * dr * k1.1);
        let k3 = rhs(r + 0.5 * dr, v + 0.5 * dr * k2.0, w + 0.5 * dr * k2.1);
        let k4 = rhs(r + dr, v + dr * k3.0, w + dr * k3.1);
        let nv = v + dr / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let nw = w + dr / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if nv <= 0.0 {
            let root = r + dr * v / (v - nv);
            table.push(0.0);
            return Some((root, table));
        }
        if nw >= 0.0 {
            return None;
        }
        r += dr;
        v = nv;
        w = nw;
        table.push(v);
    }
    None
}

/// Candidate heights and margins for the compactly supported subsolution.
#[derive(Clone, Debug, Serialize)]
pub struct SubsolutionSearch {
    /// `None` puts the centre on the vertical axis halfway up the box.
    pub center: Option<(f64, f64)>,
    pub heights: Vec<f64>,
    /// Values of `ε` in the cap equation; larger ones absorb more discretization error.
    pub margins: Vec<f64>,
}

impl Default for SubsolutionSearch {
    fn default() -> Self {
        SubsolutionSearch {
            center: None,
            heights: vec![0.99, 0.95, 0.9, 0.8, 0.7, 0.6],
            margins: vec![0.02, 0.05, 0.1],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Subsolution {
    pub center: (f64, f64),
    pub height: f64,
    pub radius: f64,
    pub epsilon: f64,
    /// `min (M f(v) + b - K v) / M` over the unknowns; nonnegative for a subsolution.
    pub margin: f64,
    pub candidates_tried: usize,
}

fn bump(grid: &Grid2D, c: (f64, f64), table: &[f64], dr: f64) -> Vec<f64> {
    grid.unknowns
        .iter()
        .map(|&id| {
            let (x, y) = grid.coords(id);
            let s = (x - c.0).hypot(y - c.1) / dr;
            let i = s.floor() as usize;
            if i + 1 >= table.len() {
                return 0.0;
            }
            let t = s - i as f64;
            ((1.0 - t) * table[i] + t * table[i + 1]).max(0.0)
        })
        .collect()
}

/// Finds a cap `v` (see [`ode_cap`]) with `-Δ_h v ≤ f(v)` at every unknown,
/// then evolves from it; the state increases to the smallest steady state above `v`.
pub fn sweep_from_subsolution(
    spec: &DomainSpec,
    nl: &Nonlinearity,
    search: &SubsolutionSearch,
    params: &SweepParams,
    reference: Option<&Field>,
) -> Result<(Subsolution, SweepResult)> {
    let grid = sweep_grid(spec, nl, params)?;
    let (x0, x1) = (grid.origin.0, grid.origin.0 + (grid.nx - 1) as f64 * grid.h);
    let (y0, y1) = (grid.origin.1, grid.origin.1 + (grid.ny - 1) as f64 * grid.h);
    let c = search.center.unwrap_or((0.0, 0.5 * (y0 + y1)));
    let op = Operator::assemble(&grid);
    let b = Operator::boundary_rhs(&grid, &|_, _| 0.0);
    let mut tried = 0;
    let clearance = spec
        .signed_distance(c.0, c.1)
        .min(c.0 - x0)
        .min(x1 - c.0)
        .min(c.1 - y0)
        .min(y1 - c.1);
    let dr = 1e-3;
    for &s in &search.heights {
        for &eps in &search.margins {
            let Some((r, table)) = ode_cap(nl, s, eps, dr, clearance) else {
                continue;
            };
            tried += 1;
            if r + grid.h > clearance {
                continue;
            }
            let v = bump(&grid, c, &table, dr);
            let kv = op.stiffness.apply(&v);
            let margin = (0..v.len())
                .map(|i| (op.mass[i] * nl.f(v[i]) + b[i] - kv[i]) / op.mass[i])
                .fold(f64::INFINITY, f64::min);
            if margin >= 0.0 {
                let sub = Subsolution {
                    center: c,
                    height: s,
                    radius: r,
                    epsilon: eps,
                    margin,
                    candidates_tried: tried,
                };
                let res = run(grid, nl, v, Direction::Nondecreasing, params, reference)?;
                return Ok((sub, res));
            }
        }
    }
    Err(Error::SubsolutionSearch(format!(
        "none of {tried} candidates centred at ({:.2}, {:.2}) satisfies -Δ_h v ≤ f(v)",
        c.0, c.1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepParams {
        SweepParams::default()
    }

    #[test]
    fn bistable_half_plane_sweeps_agree() {
        let nl = Nonlinearity::bistable_cubic(0.25).unwrap().normalize().unwrap();
        let spec = DomainSpec::half_plane();
        let p = small();
        let one = sweep_from_one(&spec, &nl, &p).unwrap();
        assert!(one.converged && one.monotone());
        assert!(one.range_violation <= 1e-12);
        assert!(one.pde_residual <= 10.0 * p.steady_tol);
        let (sub, up) = sweep_from_subsolution(&spec, &nl, &SubsolutionSearch::default(), &p, Some(&one.field)).unwrap();
        assert!(sub.margin >= 0.0 && sub.height > 0.5);
        assert!(up.converged && up.monotone());
        assert!(up.comparison_excess.unwrap() <= 1e-12);
        assert!(one.field.max_abs_diff(&up.field) <= 1e-6);
    }

    #[test]
    fn zero_order_of_data_is_kept() {
        // two starts ordered nodewise stay ordered after each step
        let nl = Nonlinearity::bistable_cubic(0.25).unwrap().normalize().unwrap();
        let spec = DomainSpec::half_plane();
        let grid = sweep_grid(&spec, &nl, &small()).unwrap();
        let st = Stepper::new(&grid, &nl, default_dt(&nl)).unwrap();
        let mut a: Vec<f64> = (0..grid.n_unknowns()).map(|i| 0.3 + 0.5 * ((i as f64) * 0.37).sin().abs()).collect();
        let mut b: Vec<f64> = a.iter().map(|v| (v + 0.05f64).min(1.0)).collect();
        for _ in 0..50 {
            a = st.step(&a);
            b = st.step(&b);
            assert!(a.iter().zip(&b).all(|(x, y)| x <= &(y + 1e-14)));
        }
    }

    #[test]
    fn balanced_bistable_has_no_compact_subsolution() {
        let nl = Nonlinearity::bistable_cubic(0.6).unwrap().normalize().unwrap();
        let r = sweep_from_subsolution(&DomainSpec::half_plane(), &nl, &SubsolutionSearch::default(), &small(), None);
        assert!(matches!(r, Err(Error::SubsolutionSearch(_))));
    }
}
