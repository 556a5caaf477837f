//! Chains of spikes along two rays, their interaction forces, and the balance
//! conditions that make such configurations approximately stationary.

mod ansatz;
mod balance;
mod chain;
mod forces;
mod interval;
mod scan;

pub use ansatz::{
    assemble_ansatz, force_normalization, polish_ansatz, relative_mismatch, Ansatz, Cutoff, LegResidue, PeriodicResidue, PolishedAnsatz, ResidueSample,
};
pub use balance::{
    plus_inclination, solve_balance, BalanceMode, BalanceOptions, BalanceOutcome, BalanceProblem, Certificate,
    Equilibrium, Phi0Model,
};
pub use chain::{inclination_of, leg_direction, max_inclination, PerturbationBound, SpikeChain, Vec2};
pub use forces::{compute_forces, interaction_f, relax_perturbations, ForceReport, SpikeForce};
pub use interval::Interval;
pub use scan::{
    ansatz_consistency, aperture_scan, period_sweep, ConsistencyReport, ConsistencyTrial, FamilyCheck, PeriodRow,
    PeriodSweep, ScanOptions, ScanRow,
};
