//! Sparse storage, Krylov and banded direct solvers, and symmetric eigen-solvers.

pub mod banded;
pub mod cg;
pub mod eigen;
pub mod sparse;
pub mod tridiag;

pub use banded::BandedLu;
pub use cg::{pcg, CgOptions, CgStats};
pub use eigen::{lowest_eigenpair, lowest_eigenpair_from, EigenOptions, Eigenpair};
pub use sparse::{Csr, TripletBuilder};
pub use tridiag::SymTridiag;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
