//! Periodic single-spike solutions: residue against the chain of spikes and
//! the instability eigenvalue, in one and two dimensions.

use spikeforge::delaunay::{delaunay_instability, log_slope, solve_delaunay, DelaunayParams};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::radial::{shoot_ground_state, ShootingOptions};

fn main() -> spikeforge::Result<()> {
    let nl = Nonlinearity::power_field(3.0)?;
    let params = DelaunayParams::default();

    let p1 = shoot_ground_state(&nl, 1, &ShootingOptions::default())?;
    let ls = [8.0, 10.0, 12.0, 14.0, 16.0];
    let mut chain = Vec::new();
    let mut raw = Vec::new();
    println!("d=1   L   residue      |u_L - U|    lambda      null-mode");
    for &l in &ls {
        let sol = solve_delaunay(&p1, l, &params)?;
        let inst = delaunay_instability(&sol, 1e-9)?;
        println!(
            "     {l:>4}  {:.4e}  {:.4e}  {:+.5}   {:.2e}",
            sol.residue, sol.raw_residue, inst.eigen.lambda, inst.null_residual
        );
        chain.push(sol.residue);
        raw.push(sol.raw_residue);
    }
    println!("slope of log residue: {:.4}", log_slope(&ls, &chain));
    println!("slope of log |u_L - U|: {:.4}", log_slope(&ls, &raw));

    let p2 = shoot_ground_state(&nl, 2, &ShootingOptions::default())?;
    let sol = solve_delaunay(&p2, 12.0, &params)?;
    let inst = delaunay_instability(&sol, 1e-8)?;
    println!(
        "d=2 L=12: residue {:.3e}, Newton iterations {}, lambda {:+.5}, null-mode residual {:.2e}",
        sol.residue, sol.newton_iterations, inst.eigen.lambda, inst.null_residual
    );
    Ok(())
}
