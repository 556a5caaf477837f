//! Tuning the chain so that the force on the central spike vanishes, and
//! certifying that no balance exists when the legs cannot point downward.

use std::f64::consts::PI;

use serde::Serialize;

use super::chain::{inclination_of, leg_direction, max_inclination, norm, SpikeChain, Vec2};
use super::forces::{compute_forces, f_derivative, f_unchecked, relax_perturbations, ForceReport};
use super::interval::Interval;
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};

/// Source of `φ₀(z₀)` as a function of the height `L₀`.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi0Model {
    /// A single value valid at the problem's `L₀` (usually from a grid solve).
    Fixed(f64),
    /// `c L₀^{-(d-1)} e^{-2L₀}`.
    Law { c: f64 },
}

impl Phi0Model {
    pub fn value(&self, d: usize, l0: f64) -> f64 {
        match *self {
            Phi0Model::Fixed(v) => v,
            Phi0Model::Law { c } => c * l0.powf(-(d as f64 - 1.0)) * (-2.0 * l0).exp(),
        }
    }

    fn derivative(&self, d: usize, l0: f64) -> Option<f64> {
        match *self {
            Phi0Model::Fixed(_) => None,
            Phi0Model::Law { .. } => Some(-self.value(d, l0) * (2.0 + (d as f64 - 1.0) / l0)),
        }
    }

    /// Encloses `φ₀` over a range of heights.
    fn enclose(&self, d: usize, l0: Interval) -> Interval {
        match *self {
            Phi0Model::Fixed(v) => Interval::point(v),
            Phi0Model::Law { .. } => l0.map_decreasing(|h| self.value(d, h)),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BalanceProblem {
    pub d: usize,
    /// Tail amplitude `A` of the ground state.
    pub amplitude: f64,
    pub l0: f64,
    pub phi0: Phi0Model,
}

/// Which parameters are held fixed; inclinations are angles below the horizontal.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum BalanceMode {
    /// Mirror-symmetric legs of inclination `inclination`; solves for `L₊ = L₋`.
    Symmetric { inclination: f64 },
    /// Fixes the left leg; solves for the right inclination and spacing.
    FixMinus {
        inclination_minus: f64,
        l_minus: f64,
        seed_inclination_plus: Option<f64>,
    },
    /// Fixes both directions; solves for both spacings.
    FixDirections { inclination_minus: f64, inclination_plus: f64 },
    /// Fixes the left leg and both spacings; solves for the right inclination and `L₀`.
    FreeHeight {
        inclination_minus: f64,
        l_minus: f64,
        l_plus: f64,
        seed_inclination_plus: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BalanceOptions {
    /// Required `‖η₀‖`.
    pub tol: f64,
    /// Newton stops once `‖η₀‖ ≤ rel_tol · φ₀(z₀)` (and `≤ tol`).
    pub rel_tol: f64,
    pub k_max: usize,
    pub max_iter: usize,
    /// Parameter box for the nonexistence certificate: heights `L₀ ± l0_halfwidth`
    /// (when `φ₀` follows a law) and spacings in `[L₀, l_factor · L₀]`.
    pub l0_halfwidth: f64,
    pub l_factor: f64,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        BalanceOptions {
            tol: 1e-8,
            rel_tol: 1e-12,
            k_max: 6,
            max_iter: 100,
            l0_halfwidth: 2.0,
            l_factor: 6.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Equilibrium {
    pub chain: SpikeChain,
    pub forces: ForceReport,
    pub phi0: f64,
    pub eta0_norm: f64,
    pub iterations: usize,
    /// Vertical force after scaling `L₊` by 1.01 and by 0.99.
    pub transversality: [f64; 2],
    /// `θ₊ₓ + θ₋ₓ`; zero for exactly anti-aligned horizontal parts.
    pub misalignment: f64,
    pub perturbation_iterations: usize,
    pub perturbation_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// Lower bound of the vertical component of `η₀` over the parameter box.
    pub margin: f64,
    pub l0: Interval,
    pub spacing: Interval,
    /// Elevation of either leg above the horizontal.
    pub elevation: Interval,
    pub boxes: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum BalanceOutcome {
    Equilibrium(Box<Equilibrium>),
    NonexistenceCertificate(Certificate),
}

impl BalanceOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            BalanceOutcome::Equilibrium(_) => "equilibrium",
            BalanceOutcome::NonexistenceCertificate(_) => "nonexistence-certificate",
        }
    }
}

/// Smallest elevation a leg may have while staying inside a domain that is
/// bounded below, or `None` when the domain has aperture above π.
fn min_elevation(spec: &DomainSpec) -> Option<f64> {
    if max_inclination(spec).is_some() {
        return None;
    }
    Some(match &spec.kind {
        DomainKind::Epigraph(_) => match spec.aperture() {
            Some(a) => (0.5 * (PI - a)).max(0.0),
            None => 0.0,
        },
        _ => 0.0,
    })
}

/// Solves the force balance on `spec`, or certifies that none exists.
pub fn solve_balance(
    spec: &DomainSpec,
    problem: &BalanceProblem,
    mode: &BalanceMode,
    opts: &BalanceOptions,
) -> Result<BalanceOutcome> {
    if !(problem.amplitude > 0.0 && problem.phi0.value(problem.d, problem.l0) > 0.0) {
        return Err(Error::Domain("amplitude and φ₀(z₀) must be positive".into()));
    }
    if let Some(eps) = min_elevation(spec) {
        return Ok(BalanceOutcome::NonexistenceCertificate(certify(problem, eps, opts)));
    }
    let beta_max = max_inclination(spec).unwrap();
    let (chain, iterations) = match *mode {
        BalanceMode::Symmetric { inclination } => {
            check_inclination(inclination, beta_max)?;
            let phi0 = problem.phi0.value(problem.d, problem.l0);
            let l = invert_f(problem.d, phi0 / (2.0 * problem.amplitude * inclination.sin()))?;
            (SpikeChain::symmetric(problem.d, problem.l0, inclination, l, opts.k_max), 0)
        }
        BalanceMode::FixDirections {
            inclination_minus,
            inclination_plus,
        } => {
            check_inclination(inclination_minus, beta_max)?;
            check_inclination(inclination_plus, beta_max)?;
            let phi0 = problem.phi0.value(problem.d, problem.l0);
            // A F(L₊) cos β₊ = A F(L₋) cos β₋ and A F(L₊) sin β₊ + A F(L₋) sin β₋ = φ₀
            let (bm, bp) = (inclination_minus, inclination_plus);
            let a_plus = phi0 / (bp.sin() + bp.cos() * bm.tan());
            let a_minus = a_plus * bp.cos() / bm.cos();
            let lp = invert_f(problem.d, a_plus / problem.amplitude)?;
            let lm = invert_f(problem.d, a_minus / problem.amplitude)?;
            let chain = SpikeChain::uniform(
                problem.d,
                problem.l0,
                leg_direction(-1.0, bm),
                lm,
                leg_direction(1.0, bp),
                lp,
                opts.k_max,
            );
            (chain, 0)
        }
        BalanceMode::FixMinus {
            inclination_minus,
            l_minus,
            seed_inclination_plus,
        } => {
            check_inclination(inclination_minus, beta_max)?;
            let seed = [seed_inclination_plus.unwrap_or(inclination_minus), l_minus];
            let (x, it) = newton2(seed, opts, |x| {
                let c = SpikeChain::uniform(
                    problem.d,
                    problem.l0,
                    leg_direction(-1.0, inclination_minus),
                    l_minus,
                    leg_direction(1.0, x[0]),
                    x[1],
                    0,
                );
                jac_plus(problem, &c, x[0], x[1], None)
            })?;
            check_inclination(x[0], beta_max)?;
            let chain = SpikeChain::uniform(
                problem.d,
                problem.l0,
                leg_direction(-1.0, inclination_minus),
                l_minus,
                leg_direction(1.0, x[0]),
                x[1],
                opts.k_max,
            );
            (chain, it)
        }
        BalanceMode::FreeHeight {
            inclination_minus,
            l_minus,
            l_plus,
            seed_inclination_plus,
        } => {
            check_inclination(inclination_minus, beta_max)?;
            if problem.phi0.derivative(problem.d, problem.l0).is_none() {
                return Err(Error::Domain("varying L₀ needs a φ₀ law".into()));
            }
            let seed = [seed_inclination_plus.unwrap_or(inclination_minus), problem.l0];
            let (x, it) = newton2(seed, opts, |x| {
                let c = SpikeChain::uniform(
                    problem.d,
                    x[1],
                    leg_direction(-1.0, inclination_minus),
                    l_minus,
                    leg_direction(1.0, x[0]),
                    l_plus,
                    0,
                );
                jac_plus(problem, &c, x[0], l_plus, Some(x[1]))
            })?;
            check_inclination(x[0], beta_max)?;
            let chain = SpikeChain::uniform(
                problem.d,
                x[1],
                leg_direction(-1.0, inclination_minus),
                l_minus,
                leg_direction(1.0, x[0]),
                l_plus,
                opts.k_max,
            );
            (chain, it)
        }
    };
    finish(problem, chain, iterations, opts).map(|e| BalanceOutcome::Equilibrium(Box::new(e)))
}

fn check_inclination(b: f64, beta_max: f64) -> Result<()> {
    if b > 0.0 && b < beta_max {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "inclination {b:.5} outside the admissible range (0, {beta_max:.5})"
        )))
    }
}

/// Solves `F(L) = target` for `L > 0` by bisection (F is decreasing).
fn invert_f(d: usize, target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Domain(format!("no spacing with F(L) = {target:e}")));
    }
    let (mut lo, mut hi) = (1e-6, 1.0);
    while f_unchecked(d, hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain(format!("no spacing with F(L) = {target:e}")));
        }
    }
    if f_unchecked(d, lo) < target {
        return Err(Error::Domain(format!("F(L) = {target:e} needs a vanishing spacing")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_unchecked(d, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `η₀` and its Jacobian with respect to `(β₊, L₊)`, or `(β₊, L₀)` when `free_l0` is given.
fn jac_plus(problem: &BalanceProblem, c: &SpikeChain, bp: f64, lp: f64, free_l0: Option<f64>) -> (Vec2, [[f64; 2]; 2]) {
    let d = problem.d;
    let l0 = free_l0.unwrap_or(problem.l0);
    let phi0 = problem.phi0.value(d, l0);
    let eta = compute_forces(c, phi0, problem.amplitude).eta0;
    let a = problem.amplitude;
    let d_beta = [-a * f_unchecked(d, lp) * bp.sin(), -a * f_unchecked(d, lp) * bp.cos()];
    let second = match free_l0 {
        None => [a * f_derivative(d, lp) * bp.cos(), -a * f_derivative(d, lp) * bp.sin()],
        Some(h) => [0.0, problem.phi0.derivative(d, h).unwrap()],
    };
    (eta, [[d_beta[0], second[0]], [d_beta[1], second[1]]])
}

/// Damped Newton on two unknowns; stops on the force tolerances.
fn newton2(
    seed: [f64; 2],
    opts: &BalanceOptions,
    eval: impl Fn([f64; 2]) -> (Vec2, [[f64; 2]; 2]),
) -> Result<([f64; 2], usize)> {
    let mut x = seed;
    let (mut r, mut j) = eval(x);
    let scale0 = norm(r).max(1e-300);
    for it in 0..opts.max_iter {
        let target = opts.tol.min(opts.rel_tol * scale0.max(norm(r)));
        if norm(r) <= target && it > 0 {
            return Ok((x, it));
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NearBifurcation("force Jacobian is singular".into()));
        }
        let dx0 = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dx1 = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        // keep steps moderate: angles by 0.05 rad, lengths by 1
        let limit = (0.05 / dx0.abs().max(1e-300)).min(1.0 / dx1.abs().max(1e-300)).min(1.0);
        let mut t = limit;
        loop {
            let trial = [x[0] + t * dx0, x[1] + t * dx1];
            let (tr, tj) = eval(trial);
            if norm(tr) < norm(r) || t < 1e-6 {
                x = trial;
                r = tr;
                j = tj;
                break;
            }
            t *= 0.5;
        }
        if norm(r) <= opts.rel_tol * scale0 * 1e-3 {
            return Ok((x, it + 1));
        }
    }
    if norm(r) <= opts.tol {
        return Ok((x, opts.max_iter));
    }
    Err(Error::NewtonDiverged(format!("force balance residual {:.3e}", norm(r))))
}

fn finish(problem: &BalanceProblem, mut chain: SpikeChain, iterations: usize, opts: &BalanceOptions) -> Result<Equilibrium> {
    let d = problem.d;
    let phi0 = problem.phi0.value(d, chain.l0);
    let (p_it, p_res) = relax_perturbations(&mut chain, problem.amplitude, 1e-14 * phi0, 2000);
    let forces = compute_forces(&chain, phi0, problem.amplitude);
    let eta0_norm = forces.eta0_norm();
    if eta0_norm > opts.tol {
        return Err(Error::NewtonDiverged(format!("‖η₀‖ = {eta0_norm:.3e} exceeds {:.1e}", opts.tol)));
    }
    let vertical = |factor: f64| {
        let mut c = chain.clone();
        c.l_plus *= factor;
        compute_forces(&c, phi0, problem.amplitude).eta0[1]
    };
    Ok(Equilibrium {
        transversality: [vertical(1.01), vertical(0.99)],
        misalignment: chain.theta_plus[0] + chain.theta_minus[0],
        chain,
        forces,
        phi0,
        eta0_norm,
        iterations,
        perturbation_iterations: p_it,
        perturbation_residual: p_res,
    })
}

/// Interval lower bound of the vertical force over the admissible box of a
/// domain whose legs must have elevation at least `eps`.
fn certify(problem: &BalanceProblem, eps: f64, opts: &BalanceOptions) -> Certificate {
    let d = problem.d;
    let l0 = match problem.phi0 {
        Phi0Model::Fixed(_) => Interval::point(problem.l0),
        Phi0Model::Law { .. } => Interval::new(
            (problem.l0 - opts.l0_halfwidth).max(0.5),
            problem.l0 + opts.l0_halfwidth,
        ),
    };
    let spacing = Interval::new(l0.lo, opts.l_factor * l0.hi);
    let elevation = Interval::new(eps, PI - eps);
    let a = Interval::point(problem.amplitude);
    let phi = problem.phi0.enclose(d, l0);
    let mut margin = f64::INFINITY;
    let mut boxes = 0;
    let pulls: Vec<Interval> = spacing
        .split(8)
        .iter()
        .flat_map(|l| {
            let fl = l.map_decreasing(|r| f_unchecked(d, r));
            elevation.split(32).into_iter().map(move |e| a * fl * e.sin())
        })
        .collect();
    for pm in &pulls {
        for pp in &pulls {
            let v = phi + *pm + *pp;
            margin = margin.min(v.lo);
            boxes += 1;
        }
    }
    Certificate {
        margin,
        l0,
        spacing,
        elevation,
        boxes,
    }
}

/// Inclination of the right leg of an equilibrium, for reporting.
pub fn plus_inclination(eq: &Equilibrium) -> f64 {
    inclination_of(eq.chain.theta_plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(l0: f64) -> BalanceProblem {
        BalanceProblem {
            d: 2,
            amplitude: 3.4,
            l0,
            phi0: Phi0Model::Law { c: 1.2 },
        }
    }

    fn equilibrium(out: BalanceOutcome) -> Equilibrium {
        match out {
            BalanceOutcome::Equilibrium(e) => *e,
            other => panic!("expected an equilibrium, got {}", other.label()),
        }
    }

    fn symmetric_spacing(spec: &DomainSpec, p: &BalanceProblem, beta: f64) -> f64 {
        let out = solve_balance(spec, p, &BalanceMode::Symmetric { inclination: beta }, &BalanceOptions::default());
        equilibrium(out.unwrap()).chain.l_plus
    }

    #[test]
    fn symmetric_matches_scalar_equation() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let beta = 0.5 * max_inclination(&cone).unwrap();
        let p = problem(6.0);
        let eq = equilibrium(solve_balance(&cone, &p, &BalanceMode::Symmetric { inclination: beta }, &BalanceOptions::default()).unwrap());
        // fixed point on L = log(2 A sin β / φ₀) - ½ log L
        let phi0 = p.phi0.value(2, 6.0);
        let rhs = (2.0 * 3.4 * beta.sin() / phi0).ln();
        let mut l = rhs;
        for _ in 0..100 {
            l = rhs - 0.5 * l.ln();
        }
        assert!((eq.chain.l_plus - l).abs() < 1e-10, "{} vs {l}", eq.chain.l_plus);
        assert!(eq.eta0_norm <= 1e-8);
        assert!(eq.transversality[0] > 0.0 && eq.transversality[1] < 0.0);
    }

    #[test]
    fn fix_minus_matches_closed_form() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let bmax = max_inclination(&cone).unwrap();
        let p = problem(6.0);
        let lm = symmetric_spacing(&cone, &p, 0.5 * bmax);
        let bm = 0.45 * bmax;
        let mode = BalanceMode::FixMinus {
            inclination_minus: bm,
            l_minus: lm,
            seed_inclination_plus: Some(0.6 * bmax),
        };
        let eq = equilibrium(solve_balance(&cone, &p, &mode, &BalanceOptions::default()).unwrap());
        let phi0 = p.phi0.value(2, 6.0);
        let am = 3.4 * f_unchecked(2, lm);
        let (x, y) = (am * bm.cos(), phi0 - am * bm.sin());
        assert!((plus_inclination(&eq) - y.atan2(x)).abs() < 1e-9);
        assert!((3.4 * f_unchecked(2, eq.chain.l_plus) - x.hypot(y)).abs() < 1e-9 * x.hypot(y));
        assert!(eq.eta0_norm <= 1e-12 * phi0 * 10.0);
    }

    #[test]
    fn free_height_balances() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let bmax = max_inclination(&cone).unwrap();
        let lm = symmetric_spacing(&cone, &problem(6.0), 0.5 * bmax);
        let mode = BalanceMode::FreeHeight {
            inclination_minus: 0.5 * bmax,
            l_minus: lm,
            l_plus: lm - 1e-3,
            seed_inclination_plus: None,
        };
        let eq = equilibrium(solve_balance(&cone, &problem(6.0), &mode, &BalanceOptions::default()).unwrap());
        assert!(eq.eta0_norm <= 1e-8);
        assert!(eq.chain.l0 != 6.0);
    }

    #[test]
    fn convex_and_flat_domains_get_certificates() {
        for a in [0.9, 0.95, 1.0] {
            let cone = DomainSpec::cone(a * PI).unwrap();
            let out = solve_balance(&cone, &problem(6.0), &BalanceMode::Symmetric { inclination: 0.01 }, &BalanceOptions::default()).unwrap();
            match out {
                BalanceOutcome::NonexistenceCertificate(c) => assert!(c.margin > 0.0),
                _ => panic!("aperture {a}π should have no equilibrium"),
            }
        }
    }

    #[test]
    fn fixed_directions_give_distinct_equilibria() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let bmax = max_inclination(&cone).unwrap();
        let p = problem(6.0);
        let solve = |bp: f64| {
            equilibrium(
                solve_balance(
                    &cone,
                    &p,
                    &BalanceMode::FixDirections {
                        inclination_minus: 0.5 * bmax,
                        inclination_plus: bp,
                    },
                    &BalanceOptions::default(),
                )
                .unwrap(),
            )
        };
        let a = solve(0.5 * bmax);
        let b = solve(0.6 * bmax);
        assert!((a.chain.l_plus - b.chain.l_plus).abs() > 1e-3);
        assert!(a.eta0_norm <= 1e-8 && b.eta0_norm <= 1e-8);
    }

    #[test]
    fn steep_inclination_is_rejected() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let bmax = max_inclination(&cone).unwrap();
        let r = solve_balance(&cone, &problem(6.0), &BalanceMode::Symmetric { inclination: 1.5 * bmax }, &BalanceOptions::default());
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}
