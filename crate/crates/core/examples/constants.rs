//! The constant D by volume quadrature and by the flux formula, and the
//! constant E with its weighted counterpart.

use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{constant_d, constant_e, shoot_ground_state, ShootingOptions};

fn main() -> spikeforge::Result<()> {
    let cases = [
        (1, 3.0, Some((4.0 * 2f64.sqrt(), 3.2))),
        (1, 2.0, Some((12.0, 72.0 / 35.0))),
        (2, 3.0, None),
        (3, 3.0, None),
    ];
    println!("d  p   D(volume)    D(flux)      gap        E            E(weighted)  exact D, E");
    for (d, p, exact) in cases {
        let prof = shoot_ground_state(&Nonlinearity::power_field(p)?, d, &ShootingOptions::default())?;
        let dc = constant_d(&prof)?;
        let e = constant_e(&prof)?;
        println!(
            "{d}  {p}   {:<12.8} {:<12.8} {:.2e}   {:<12.8} {:<12.8} {}",
            dc.volume,
            dc.flux,
            dc.relative_gap,
            e.value,
            e.weighted,
            exact.map_or("-".to_string(), |(a, b)| format!("{a:.8}, {b:.8}"))
        );
    }
    Ok(())
}
