//! Parabolic sweeps on the half-plane: the bistable cubic from one and from a
//! compact subsolution, and the field term `-u + u²` from one.

use spikeforge::domain::DomainSpec;
use spikeforge::nonlin::Nonlinearity;
use spikeforge::parabolic::{
    far_field_limit, monotonicity_check, stability_of_steady, sweep_from_one, sweep_from_subsolution, SubsolutionSearch,
    SweepParams,
};

fn main() -> spikeforge::Result<()> {
    let spec = DomainSpec::half_plane();
    let bistable = Nonlinearity::bistable_cubic(0.25)?.normalize()?;
    let params = SweepParams::default();

    let one = sweep_from_one(&spec, &bistable, &params)?;
    println!(
        "from one: t = {:.1} ({} steps, dt {:.4}), max|u_t| {:.2e}, residual {:.2e}, monotone {}",
        one.time,
        one.steps,
        one.dt,
        one.max_dt,
        one.pde_residual,
        one.monotone()
    );
    let (sub, up) = sweep_from_subsolution(&spec, &bistable, &SubsolutionSearch::default(), &params, Some(&one.field))?;
    println!(
        "subsolution s = {} R = {:.3} eps = {} margin {:.2e}; sweep t = {:.1}, above reference by {:.2e}",
        sub.height,
        sub.radius,
        sub.epsilon,
        sub.margin,
        up.time,
        up.comparison_excess.unwrap_or(f64::NAN)
    );
    println!("|from one - from subsolution| = {:.3e}", one.field.max_abs_diff(&up.field));
    println!("min d_y u = {:.3e}", monotonicity_check(&one.field, &spec));
    for b in far_field_limit(&one.field, &spec, 6, 1.0) {
        println!("  distance [{:5.2}, {:5.2}]  nodes {:5}  sup|u-1| {:.3e}", b.lo, b.hi, b.nodes, b.sup_deviation);
    }
    let lam = stability_of_steady(&one.field, &one.grid, &bistable, 1e-9)?;
    let big = sweep_from_one(&spec, &bistable, &params.doubled())?;
    let lam2 = stability_of_steady(&big.field, &big.grid, &bistable, 1e-9)?;
    println!("principal eigenvalue {:.5} (box), {:.5} (doubled box)", lam.lambda, lam2.lambda);
    let half = sweep_from_one(&spec, &bistable, &SweepParams { dt: Some(0.5 * one.dt), ..params })?;
    println!("dt halved: steady state moves by {:.2e}", half.field.max_abs_diff(&one.field));

    let field = Nonlinearity::power_field(2.0)?;
    let decay = sweep_from_one(&spec, &field, &params)?;
    println!("field term p = 2: sup u = {:.3e} at t = {:.1}", decay.sup(), decay.time);
    Ok(())
}
