//! Force balance across cone apertures: certified nonexistence below π and
//! equilibria (with a tilted neighbour) above.

use std::f64::consts::PI;

use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};
use spikeforge::spikes::{aperture_scan, BalanceOutcome, ScanOptions};

fn main() -> spikeforge::Result<()> {
    let profile = shoot_ground_state(&Nonlinearity::power_field(3.0)?, 2, &ShootingOptions::default())?;
    let apertures = [0.9, 0.95, 1.05, 1.1, 1.2];
    let rad: Vec<f64> = apertures.iter().map(|a| a * PI).collect();
    for (row, a) in aperture_scan(&rad, &profile, &ScanOptions::default())?.iter().zip(apertures) {
        match &row.outcome {
            BalanceOutcome::Equilibrium(eq) => {
                let fam = row.family.as_ref().map_or(String::from("none"), |f| {
                    format!("tilted leg: L+ {:.4} (shift {:+.4})", f.l_plus, f.delta_l_plus)
                });
                println!(
                    "{a:.2}π  equilibrium  phi0 {:.3e}  L {:.4}  |eta0| {:.1e}  {fam}",
                    row.phi0, eq.chain.l_plus, eq.eta0_norm
                );
            }
            BalanceOutcome::NonexistenceCertificate(c) => println!(
                "{a:.2}π  certificate  phi0 {:.3e}  vertical force ≥ {:.3e} over {} boxes",
                row.phi0, c.margin, c.boxes
            ),
        }
    }
    Ok(())
}
