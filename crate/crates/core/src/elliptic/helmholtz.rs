use super::Operator;
use crate::domain::{Field, Grid2D};
use crate::error::Result;
use crate::linalg::{pcg, CgOptions, CgStats};

#[derive(Clone, Debug)]
pub struct HelmholtzSolution {
    pub field: Field,
    pub stats: CgStats,
}

/// Solves `(-Δ_h + 1) w = rhs` with Dirichlet data `boundary` on ∂Ω and on
/// truncation sides tagged `Data`.
pub fn solve_helmholtz_dirichlet(
    grid: &Grid2D,
    boundary: &dyn Fn(f64, f64) -> f64,
    rhs: &Field,
) -> Result<HelmholtzSolution> {
    let opts = CgOptions::default();
    solve_shifted(grid, &vec![1.0; grid.n_unknowns()], boundary, &rhs.unknown_values(grid), &opts)
}

/// Solves `(-Δ_h + v) w = f` at the unknowns; `v ≥ 0` is required for CG.
pub fn solve_shifted(
    grid: &Grid2D,
    v: &[f64],
    boundary: &dyn Fn(f64, f64) -> f64,
    f: &[f64],
    opts: &CgOptions,
) -> Result<HelmholtzSolution> {
    let op = Operator::assemble(grid);
    let a = op.with_potential(v);
    let mut b = Operator::boundary_rhs(grid, boundary);
    for (k, bk) in b.iter_mut().enumerate() {
        *bk += op.mass[k] * f[k];
    }
    let mut w = vec![0.0; grid.n_unknowns()];
    let stats = pcg(&a, &b, &mut w, opts)?;
    Ok(HelmholtzSolution {
        field: Field::from_unknowns(grid, &w, boundary),
        stats,
    })
}
