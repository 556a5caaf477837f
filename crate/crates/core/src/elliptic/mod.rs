//! Linear elliptic problems on masked grids: Helmholtz solves, the Dirichlet
//! projection of a translated ground state, and principal eigenvalues.

mod eigen;
mod helmholtz;
mod newton;
mod operator;
mod projection;

pub use eigen::{
    eig_perturbation_check, principal_eigenvalue, random_bumps, thin_set_eigenvalue, thin_set_eigenvalue_2d, unit_disk_grid, Bump,
    EigenResult, PerturbationEntry, PerturbationReport,
};
pub use helmholtz::{solve_helmholtz_dirichlet, solve_shifted, HelmholtzSolution};
pub use newton::{semilinear_residual, solve_semilinear, NewtonOptions, NewtonSolution};
pub use operator::Operator;
pub use projection::{
    dirichlet_projection, exponential_profile_check, half_line_projection, HalfLineProjection, ProfileDeviation,
    ProjectionParams, ProjectionResult,
};
