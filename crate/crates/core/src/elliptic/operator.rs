//! Symmetric finite-volume form of `-Δ` on a masked grid.
//!
//! Each unknown owns the cell `[x - h/2, x + h/2] × [y - h/2, y + h/2]`
//! clipped to the box. An arm to a neighbour carries the face weight (the
//! clipped face length over `h`); an arm that leaves Ω at fraction `θ` is
//! closed at the boundary point with weight divided by `θ`. Only the
//! diagonal sees the boundary, so the matrix stays symmetric and, for a
//! nonnegative potential, positive definite.

use crate::domain::{Grid2D, Link, DIRS};
use crate::linalg::{Csr, TripletBuilder};

/// Stiffness `K` and lumped mass `M` with `K u ≈ M (-Δu)` at the unknowns.
#[derive(Clone, Debug)]
pub struct Operator {
    pub stiffness: Csr,
    pub mass: Vec<f64>,
}

fn face_weight(grid: &Grid2D, id: usize, dir: usize) -> f64 {
    let (fx, fy) = grid.cell_factors(id);
    if dir < 2 {
        fy
    } else {
        fx
    }
}

impl Operator {
    pub fn assemble(grid: &Grid2D) -> Self {
        let n = grid.n_unknowns();
        let mut tb = TripletBuilder::new(n);
        let mut mass = Vec::with_capacity(n);
        for (k, &id) in grid.unknowns.iter().enumerate() {
            let (fx, fy) = grid.cell_factors(id);
            mass.push(grid.h * grid.h * fx * fy);
            for (dir, link) in grid.links[k].iter().enumerate() {
                let a = face_weight(grid, id, dir);
                match *link {
                    Link::Unknown(q) => {
                        tb.add(k, k, a);
                        tb.add(k, q, -a);
                    }
                    Link::Fixed(_) => tb.add(k, k, a),
                    Link::Boundary(theta) => tb.add(k, k, a / theta),
                    Link::Mirror => {}
                }
            }
        }
        Operator {
            stiffness: tb.build(),
            mass,
        }
    }

    /// Contribution of Dirichlet data to the right-hand side: `K u = M f + b`.
    ///
    /// `data` is evaluated at boundary crossing points and at truncation nodes
    /// whose side carries [`crate::domain::SideBc::Data`].
    pub fn boundary_rhs(grid: &Grid2D, data: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut b = vec![0.0; grid.n_unknowns()];
        for (k, &id) in grid.unknowns.iter().enumerate() {
            let (x, y) = grid.coords(id);
            for (dir, link) in grid.links[k].iter().enumerate() {
                let a = face_weight(grid, id, dir);
                match *link {
                    Link::Fixed(q) => b[k] += a * grid.truncation_value(q, data),
                    Link::Boundary(theta) => {
                        let (dx, dy) = DIRS[dir];
                        let px = x + theta * grid.h * dx as f64;
                        let py = y + theta * grid.h * dy as f64;
                        b[k] += a / theta * data(px, py);
                    }
                    _ => {}
                }
            }
        }
        b
    }

    /// `K + diag(M v)` for a potential given at the unknowns.
    pub fn with_potential(&self, v: &[f64]) -> Csr {
        let d: Vec<f64> = self.mass.iter().zip(v).map(|(m, p)| m * p).collect();
        self.stiffness.add_diagonal(&d)
    }

    /// `-Δ_h u` at the unknowns, given Dirichlet data for the closed arms.
    pub fn neg_laplacian(&self, grid: &Grid2D, u: &[f64], data: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
        let ku = self.stiffness.apply(u);
        let b = Self::boundary_rhs(grid, data);
        ku.iter()
            .zip(&b)
            .zip(&self.mass)
            .map(|((k, b), m)| (k - b) / m)
            .collect()
    }
}
