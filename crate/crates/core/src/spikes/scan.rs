//! Scans over domain apertures and heights, and the check that the force
//! model agrees with the residual of the assembled ansatz.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ansatz::assemble_ansatz;
use super::balance::{solve_balance, BalanceMode, BalanceOptions, BalanceOutcome, BalanceProblem, Phi0Model};
use super::chain::{inclination_of, leg_direction, max_inclination, norm, SpikeChain};
use crate::domain::DomainSpec;
use crate::elliptic::{dirichlet_projection, ProjectionParams, ProjectionResult};
use crate::error::Result;
use crate::radial::RadialProfile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanOptions {
    pub l0: f64,
    pub projection: ProjectionParams,
    pub balance: BalanceOptions,
    /// Leg inclination as a fraction of the largest admissible one.
    pub inclination_fraction: f64,
    /// Relative tilt of the right leg for the family check.
    pub family_offset: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            l0: 6.0,
            projection: ProjectionParams::default(),
            balance: BalanceOptions::default(),
            inclination_fraction: 0.5,
            family_offset: 0.2,
        }
    }
}

/// A second equilibrium obtained by tilting the right leg.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyCheck {
    pub inclination_plus: f64,
    pub l_plus: f64,
    pub l_minus: f64,
    pub delta_l_plus: f64,
    pub eta0_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub aperture: f64,
    pub phi0: f64,
    pub outcome: BalanceOutcome,
    pub family: Option<FamilyCheck>,
}

impl ScanRow {
    pub fn label(&self) -> &'static str {
        self.outcome.label()
    }
}

fn cone_problem(aperture: f64, profile: &RadialProfile, opts: &ScanOptions) -> Result<(DomainSpec, BalanceProblem, f64)> {
    let spec = DomainSpec::cone(aperture)?;
    let pr = dirichlet_projection(&spec, profile, opts.l0, &opts.projection)?;
    let problem = BalanceProblem {
        d: profile.d,
        amplitude: profile.amplitude,
        l0: opts.l0,
        phi0: Phi0Model::Fixed(pr.phi0_center),
    };
    Ok((spec, problem, pr.phi0_center))
}

/// Balance (or certified nonexistence) on cones of the given apertures, with
/// `φ₀(z₀)` from the grid projection. Each equilibrium is re-solved with a
/// tilted right leg to exhibit a nearby distinct member of the family.
pub fn aperture_scan(apertures: &[f64], profile: &RadialProfile, opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    apertures
        .par_iter()
        .map(|&aperture| {
            let (spec, problem, phi0) = cone_problem(aperture, profile, opts)?;
            let beta = max_inclination(&spec).map_or(0.0, |b| opts.inclination_fraction * b);
            let outcome = solve_balance(&spec, &problem, &BalanceMode::Symmetric { inclination: beta }, &opts.balance)?;
            let family = match &outcome {
                BalanceOutcome::Equilibrium(eq) => {
                    let tilted = beta * (1.0 + opts.family_offset);
                    let mode = BalanceMode::FixDirections {
                        inclination_minus: beta,
                        inclination_plus: tilted,
                    };
                    match solve_balance(&spec, &problem, &mode, &opts.balance)? {
                        BalanceOutcome::Equilibrium(other) => Some(FamilyCheck {
                            inclination_plus: tilted,
                            l_plus: other.chain.l_plus,
                            l_minus: other.chain.l_minus,
                            delta_l_plus: other.chain.l_plus - eq.chain.l_plus,
                            eta0_norm: other.eta0_norm,
                        }),
                        BalanceOutcome::NonexistenceCertificate(_) => None,
                    }
                }
                BalanceOutcome::NonexistenceCertificate(_) => None,
            };
            Ok(ScanRow {
                aperture,
                phi0,
                outcome,
                family,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodRow {
    pub l0: f64,
    pub phi0: f64,
    pub spacing: f64,
    /// `L - 2L₀ - ((d-1)/2) log L₀`.
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodSweep {
    pub aperture: f64,
    pub rows: Vec<PeriodRow>,
    /// Midrange of the offsets, which minimizes the largest deviation.
    pub fitted_constant: f64,
    pub max_deviation: f64,
}

/// Symmetric equilibria on one cone over a range of heights.
pub fn period_sweep(aperture: f64, l0s: &[f64], profile: &RadialProfile, opts: &ScanOptions) -> Result<PeriodSweep> {
    let d = profile.d as f64;
    let rows: Vec<PeriodRow> = l0s
        .par_iter()
        .map(|&l0| {
            let o = ScanOptions { l0, ..*opts };
            let (spec, problem, phi0) = cone_problem(aperture, profile, &o)?;
            let beta = max_inclination(&spec).map_or(0.0, |b| o.inclination_fraction * b);
            let out = solve_balance(&spec, &problem, &BalanceMode::Symmetric { inclination: beta }, &o.balance)?;
            let spacing = match out {
                BalanceOutcome::Equilibrium(eq) => eq.chain.l_plus,
                BalanceOutcome::NonexistenceCertificate(_) => f64::NAN,
            };
            Ok(PeriodRow {
                l0,
                phi0,
                spacing,
                offset: spacing - 2.0 * l0 - 0.5 * (d - 1.0) * l0.ln(),
            })
        })
        .collect::<Result<_>>()?;
    let lo = rows.iter().map(|r| r.offset).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.offset).fold(f64::NEG_INFINITY, f64::max);
    let c = 0.5 * (lo + hi);
    Ok(PeriodSweep {
        aperture,
        max_deviation: rows.iter().map(|r| (r.offset - c).abs()).fold(0.0, f64::max),
        rows,
        fitted_constant: c,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyTrial {
    pub l_minus: f64,
    pub l_plus: f64,
    pub inclination_minus: f64,
    pub inclination_plus: f64,
    pub measured_force: f64,
    pub residual_sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub seed: u64,
    pub model_force: [f64; 2],
    pub equilibrium_measured: [f64; 2],
    pub equilibrium_residual_sup: f64,
    pub localization_ratio: f64,
    pub trials: Vec<ConsistencyTrial>,
    /// Trials whose projected force exceeds the equilibrium's.
    pub wins: usize,
}

/// Compares the force read off the ansatz residual at an equilibrium with
/// that at `count` chains whose spacings and inclinations are each moved by
/// ±`relative` (random signs).
pub fn ansatz_consistency(
    chain: &SpikeChain,
    pr: &ProjectionResult,
    profile: &RadialProfile,
    count: usize,
    relative: f64,
    seed: u64,
) -> Result<ConsistencyReport> {
    let base = assemble_ansatz(chain, pr, profile, [None, None])?;
    let forces = super::forces::compute_forces(chain, pr.phi0_center, profile.amplitude);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(count);
    for _ in 0..count {
        let mut sign = || if rng.gen_bool(0.5) { 1.0 + relative } else { 1.0 - relative };
        let (fm, fp, gm, gp) = (sign(), sign(), sign(), sign());
        let bm = inclination_of(chain.theta_minus) * gm;
        let bp = inclination_of(chain.theta_plus) * gp;
        let c = SpikeChain::uniform(
            chain.d,
            chain.l0,
            leg_direction(-1.0, bm),
            chain.l_minus * fm,
            leg_direction(1.0, bp),
            chain.l_plus * fp,
            chain.k_max(),
        );
        let a = assemble_ansatz(&c, pr, profile, [None, None])?;
        trials.push(ConsistencyTrial {
            l_minus: c.l_minus,
            l_plus: c.l_plus,
            inclination_minus: bm,
            inclination_plus: bp,
            measured_force: norm(a.measured_force),
            residual_sup: a.residual_sup,
        });
    }
    let eq_norm = norm(base.measured_force);
    Ok(ConsistencyReport {
        seed,
        model_force: forces.eta0,
        equilibrium_measured: base.measured_force,
        equilibrium_residual_sup: base.residual_sup,
        localization_ratio: base.localization_ratio,
        wins: trials.iter().filter(|t| t.measured_force > eq_norm).count(),
        trials,
    })
}
