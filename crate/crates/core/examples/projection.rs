//! Dirichlet projection of a 2D ground state on a cone of aperture 1.25π.
//!
//! Prints `log φ₀(z₀) + 2L₀ + log L₀` and the exponential-profile deviation
//! for a sweep of spike heights.

use std::f64::consts::PI;

use spikeforge::domain::DomainSpec;
use spikeforge::elliptic::{dirichlet_projection, exponential_profile_check, ProjectionParams};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};

fn main() -> spikeforge::Result<()> {
    let nl = Nonlinearity::power_field(3.0)?;
    let profile = shoot_ground_state(&nl, 2, &ShootingOptions::default())?;
    let cone = DomainSpec::cone(1.25 * PI)?;
    let params = ProjectionParams::default();
    println!("L0  phi0(z0)     normalized  min(phi0)   deviation  gradient   sup|Ubar|/U0");
    for l0 in [4.0, 5.0, 6.0, 7.0, 8.0] {
        let pr = dirichlet_projection(&cone, &profile, l0, &params)?;
        let dev = exponential_profile_check(&pr, l0)?;
        println!(
            "{l0:<3} {:.4e}  {:+.5}    {:.2e}   {:.4e} {:.4e} {:.3}",
            pr.phi0_center,
            pr.phi0_center.ln() + 2.0 * l0 + l0.ln(),
            pr.phi0_min,
            dev.max_deviation,
            dev.max_gradient,
            pr.comparison_constant
        );
    }
    Ok(())
}
