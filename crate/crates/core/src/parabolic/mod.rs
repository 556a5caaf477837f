//! Time stepping of `∂_t u = Δu + f(u)` toward steady states, and
//! diagnostics (monotonicity, far-field limit, linear stability) of the result.

mod diagnostics;
mod sweep;

pub use diagnostics::{far_field_limit, monotonicity_check, stability_of_steady, FarFieldBin};
pub use sweep::{
    ode_cap, sweep_from_one, sweep_from_subsolution, sweep_grid, Direction, SeriesRow, Subsolution,
    SubsolutionSearch, SweepParams, SweepResult,
};
