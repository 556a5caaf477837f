//! Principal eigenvalue of `-Δ + V` on the unit disk under random bump
//! potentials, and the shrinking-slab eigenvalue with `a = -2 Lip f`.

use spikeforge::elliptic::{eig_perturbation_check, random_bumps, thin_set_eigenvalue, thin_set_eigenvalue_2d};
use spikeforge::nonlin::Nonlinearity;

fn main() -> spikeforge::Result<()> {
    let bumps = random_bumps(20, 5.0, 1);
    let fns: Vec<_> = bumps.iter().map(|b| move |x: f64, y: f64| b.eval(x, y)).collect();
    let refs: Vec<&dyn Fn(f64, f64) -> f64> = fns.iter().map(|f| f as &dyn Fn(f64, f64) -> f64).collect();
    let rep = eig_perturbation_check(&refs, 2.0, 0.05, 2.0, 1e-10)?;
    println!("lambda(-Δ, B1) = {:.6}", rep.lambda0);
    for (b, e) in bumps.iter().zip(&rep.entries).take(5) {
        println!(
            "  amp {:+.3} width {:.3}: delta {:+.4e}  |V|_1 {:.4e}  |V|_2 {:.4e}",
            b.amp, b.width, e.delta, e.norm_l1, e.norm_lq
        );
    }
    println!("empirical constant {:.4} (configured {}), violations {}", rep.c_empirical, rep.c_configured, rep.violations);

    let nl = Nonlinearity::bistable_cubic(0.25)?.normalize()?;
    let a = -2.0 * nl.lipschitz(0.0, 1.0);
    println!("slab potential a = {a:.4}");
    let mut eta = 0.5;
    for _ in 0..5 {
        println!("  eta {eta:<7} lambda {:+.6e}", thin_set_eigenvalue(a, eta, 20.0, 0.005)?);
        eta *= 0.5;
    }
    let one = thin_set_eigenvalue(a, 0.3, 8.0, 0.1)?;
    let two = thin_set_eigenvalue_2d(a, 0.3, 8.0, 0.1, 1e-10)?;
    println!("reduction check at eta 0.3: 1D {one:.10} vs 2D grid {two:.10}");
    Ok(())
}
