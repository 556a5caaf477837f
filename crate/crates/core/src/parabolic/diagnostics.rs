use serde::Serialize;

use crate::domain::{DomainSpec, Field, Grid2D};
use crate::elliptic::{principal_eigenvalue, EigenResult};
use crate::error::Result;
use crate::nonlin::Nonlinearity;

/// Minimum centred difference `(u(y+h) - u(y-h)) / 2h` over nodes at least
/// `2h` inside the domain and off the box edges.
pub fn monotonicity_check(field: &Field, spec: &DomainSpec) -> f64 {
    let h = field.h;
    let mut min = f64::INFINITY;
    for j in 1..field.ny.saturating_sub(1) {
        for i in 1..field.nx - 1 {
            let (x, y) = field.coords(i, j);
            if spec.signed_distance(x, y) < 2.0 * h {
                continue;
            }
            let d = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * h);
            min = min.min(d);
        }
    }
    min
}

#[derive(Clone, Debug, Serialize)]
pub struct FarFieldBin {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    /// `sup |u - target|` over the bin.
    pub sup_deviation: f64,
}

/// Bins the nodes off the box edges by distance to `∂Ω` and reports the
/// largest deviation from `target` in each bin.
pub fn far_field_limit(field: &Field, spec: &DomainSpec, bins: usize, target: f64) -> Vec<FarFieldBin> {
    let mut pts = Vec::new();
    for j in 1..field.ny.saturating_sub(1) {
        for i in 1..field.nx.saturating_sub(1) {
            let (x, y) = field.coords(i, j);
            let d = spec.signed_distance(x, y);
            if d > 0.0 {
                pts.push((d, (field.at(i, j) - target).abs()));
            }
        }
    }
    let dmax = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let bins = bins.max(1);
    let width = dmax / bins as f64;
    let mut out: Vec<FarFieldBin> = (0..bins)
        .map(|k| FarFieldBin {
            lo: k as f64 * width,
            hi: (k + 1) as f64 * width,
            nodes: 0,
            sup_deviation: 0.0,
        })
        .collect();
    for (d, dev) in pts {
        let k = ((d / width) as usize).min(bins - 1);
        out[k].nodes += 1;
        out[k].sup_deviation = out[k].sup_deviation.max(dev);
    }
    out
}

/// Principal eigenvalue of `-Δ_h - f'(u)` with Dirichlet conditions on every
/// closed side of the grid.
pub fn stability_of_steady(field: &Field, grid: &Grid2D, nl: &Nonlinearity, tol: f64) -> Result<EigenResult> {
    let potential = field.map(|u| -nl.df(u));
    principal_eigenvalue(grid, &potential, tol)
}
