//! Radial ground states by shooting: the 1D closed forms, tail amplitudes in
//! higher dimensions, and a bistable profile.

use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};

fn main() -> spikeforge::Result<()> {
    let opts = ShootingOptions::default();

    let cubic = Nonlinearity::power_field(3.0)?;
    let p = shoot_ground_state(&cubic, 1, &opts)?;
    let err = (0..p.len())
        .filter(|&i| p.radius(i) <= 20.0)
        .map(|i| (p.u[i] - 2f64.sqrt() / p.radius(i).cosh()).abs())
        .fold(0.0, f64::max);
    println!("d=1 p=3: U(0) = {:.9}, A = {:.9} (2√2 = {:.9}), max |U - √2 sech| = {err:.2e}", p.u0(), p.amplitude, 2.0 * 2f64.sqrt());

    let quad = Nonlinearity::power_field(2.0)?;
    let p = shoot_ground_state(&quad, 1, &opts)?;
    println!("d=1 p=2: U(0) = {:.9}, A = {:.9} (exact 6)", p.u0(), p.amplitude);

    for d in [2, 3] {
        let p = shoot_ground_state(&cubic, d, &opts)?;
        println!(
            "d={d} p=3: U(0) = {:.6}, A = {:.6}, tail fit residual {:.1e} on [{:.1}, {:.1}]",
            p.u0(),
            p.amplitude,
            p.fit_residual,
            p.fit_window.0,
            p.fit_window.1
        );
    }

    let bistable = Nonlinearity::bistable_cubic(0.25)?.normalize()?;
    let p = shoot_ground_state(&bistable, 2, &opts)?;
    println!("d=2 bistable θ=0.25: U(0) = {:.6}, A = {:.6}", p.u0(), p.amplitude);
    Ok(())
}
