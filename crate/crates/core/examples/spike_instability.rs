//! Instability of a balanced spike chain: the assembled ansatz on a cone of
//! aperture 1.25π, a short Newton polish, and the principal eigenvalue of
//! `-Δ - f'(u)`.

use std::f64::consts::PI;

use spikeforge::domain::DomainSpec;
use spikeforge::elliptic::{dirichlet_projection, principal_eigenvalue, ProjectionParams};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};
use spikeforge::spikes::{
    assemble_ansatz, max_inclination, polish_ansatz, solve_balance, BalanceMode, BalanceOptions, BalanceOutcome,
    BalanceProblem, Phi0Model,
};

fn main() -> spikeforge::Result<()> {
    let profile = shoot_ground_state(&Nonlinearity::power_field(3.0)?, 2, &ShootingOptions::default())?;
    let cone = DomainSpec::cone(1.25 * PI)?;
    let l0 = 5.0;
    let pr = dirichlet_projection(&cone, &profile, l0, &ProjectionParams { h: 0.15, ..ProjectionParams::default() })?;
    let problem = BalanceProblem {
        d: 2,
        amplitude: profile.amplitude,
        l0,
        phi0: Phi0Model::Fixed(pr.phi0_center),
    };
    let beta = 0.5 * max_inclination(&cone).unwrap();
    let BalanceOutcome::Equilibrium(eq) =
        solve_balance(&cone, &problem, &BalanceMode::Symmetric { inclination: beta }, &BalanceOptions::default())?
    else {
        unreachable!("cone wider than π")
    };
    // One spike per leg keeps every core well inside the box.
    let mut chain = eq.chain.clone();
    chain.p_minus.truncate(1);
    chain.p_plus.truncate(1);
    let ans = assemble_ansatz(&chain, &pr, &profile, [None, None])?;
    let pol = polish_ansatz(&ans, &pr, &profile, 10)?;
    let nl = &profile.nl;
    let eig = principal_eigenvalue(&pr.grid, &pol.field.map(|u| -nl.df(u)), 1e-9)?;
    println!(
        "L = {:.4}; grid residual {:.3e} -> {:.3e} after {} Newton steps; principal eigenvalue {:+.5}",
        eq.chain.l_plus, pol.residual_before, pol.residual_after, pol.steps, eig.lambda
    );
    Ok(())
}
