//! Force balance of a symmetric spike chain on a cone of aperture 1.25π, and
//! the force read back from the residual of the assembled approximate solution.

use std::f64::consts::PI;

use spikeforge::domain::DomainSpec;
use spikeforge::elliptic::{dirichlet_projection, ProjectionParams};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};
use spikeforge::spikes::{
    ansatz_consistency, max_inclination, solve_balance, BalanceMode, BalanceOptions, BalanceOutcome, BalanceProblem,
    Phi0Model,
};

fn main() -> spikeforge::Result<()> {
    let nl = Nonlinearity::power_field(3.0)?;
    let profile = shoot_ground_state(&nl, 2, &ShootingOptions::default())?;
    let cone = DomainSpec::cone(1.25 * PI)?;
    let beta = 0.5 * max_inclination(&cone).unwrap();
    println!("L0  phi0(z0)    L          |eta0|     |measured|/phi0  residual   localization  wins");
    for l0 in [4.0, 5.0, 6.0] {
        let pr = dirichlet_projection(&cone, &profile, l0, &ProjectionParams::default())?;
        let problem = BalanceProblem {
            d: 2,
            amplitude: profile.amplitude,
            l0,
            phi0: Phi0Model::Fixed(pr.phi0_center),
        };
        let BalanceOutcome::Equilibrium(eq) =
            solve_balance(&cone, &problem, &BalanceMode::Symmetric { inclination: beta }, &BalanceOptions::default())?
        else {
            unreachable!("cone wider than π")
        };
        let rep = ansatz_consistency(&eq.chain, &pr, &profile, 10, 0.1, 7)?;
        let m = rep.equilibrium_measured;
        println!(
            "{l0:<3} {:.4e}  {:.6}  {:.2e}   {:.3e}        {:.3e}  {:.2e}      {}/10",
            pr.phi0_center,
            eq.chain.l_plus,
            eq.eta0_norm,
            m[0].hypot(m[1]) / pr.phi0_center,
            rep.equilibrium_residual_sup,
            rep.localization_ratio,
            rep.wins
        );
        for t in &rep.trials {
            println!("      trial |measured|/phi0 {:.3e} residual {:.3e}", t.measured_force / pr.phi0_center, t.residual_sup);
        }
    }
    Ok(())
}
