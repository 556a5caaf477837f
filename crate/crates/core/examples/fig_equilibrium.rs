//! Writes the centres and force arrows of a symmetric equilibrium on a cone
//! of aperture 1.2π as plot-ready CSV, next to its JSON description.

use std::f64::consts::PI;

use spikeforge::cli::{equilibrium_json, figure_csv};
use spikeforge::domain::DomainSpec;
use spikeforge::elliptic::{dirichlet_projection, ProjectionParams};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};
use spikeforge::report::{to_pretty, write_atomic};
use spikeforge::spikes::{max_inclination, solve_balance, BalanceMode, BalanceOptions, BalanceOutcome, BalanceProblem, Phi0Model};

fn main() -> spikeforge::Result<()> {
    let profile = shoot_ground_state(&Nonlinearity::power_field(3.0)?, 2, &ShootingOptions::default())?;
    let cone = DomainSpec::cone(1.2 * PI)?;
    let l0 = 6.0;
    let pr = dirichlet_projection(&cone, &profile, l0, &ProjectionParams::default())?;
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
    let dir = std::env::temp_dir().join("spikeforge-figure");
    write_atomic(&dir.join("equilibrium_figure.csv"), &figure_csv(&eq, &cone))?;
    write_atomic(&dir.join("equilibrium.json"), to_pretty(&equilibrium_json(&eq)).as_bytes())?;
    println!("L = {:.6}, |eta0| = {:.1e}; wrote {}", eq.chain.l_plus, eq.eta0_norm, dir.display());
    for (k, z) in eq.chain.centers().iter().filter(|(k, _)| k.abs() <= 2) {
        println!("  z_{k:<2} = ({:+9.4}, {:+9.4})", z[0], z[1]);
    }
    Ok(())
}
