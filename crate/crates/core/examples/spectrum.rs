//! Spectrum of the linearization `-Δ + 1 - f'(U)` about the ground state,
//! sector by sector, and the kernel check.

use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{free_spectrum, nondegeneracy, shoot_ground_state, ShootingOptions};

fn main() -> spikeforge::Result<()> {
    let nl = Nonlinearity::power_field(3.0)?;
    for d in [1, 2, 3] {
        let prof = shoot_ground_state(&nl, d, &ShootingOptions::default())?;
        let rep = nondegeneracy(&prof, 1e-3)?;
        let free = free_spectrum(&prof, 0, 1)?;
        println!(
            "d={d}: radial {:?}, translational {:?}, l=2 {:?}, free threshold {:.4}, nondegenerate {}",
            rep.radial.iter().map(|v| format!("{v:+.5}")).collect::<Vec<_>>(),
            rep.translational.iter().map(|v| format!("{v:+.5}")).collect::<Vec<_>>(),
            rep.higher.map(|v| format!("{v:+.5}")),
            free[0],
            rep.nondegenerate
        );
    }
    Ok(())
}
