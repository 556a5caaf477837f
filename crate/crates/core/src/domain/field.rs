use std::io::Write;
use std::path::Path;

use super::grid::{Grid2D, NodeKind, SidePolicy};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SPKF";
const VERSION: u32 = 1;

/// Boundary conditions a field was produced under (physical boundary is always Dirichlet zero
/// unless data were supplied).
pub type FieldTag = SidePolicy;

/// Node values on a uniform grid, stored row-major (`j * nx + i`).
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: (f64, f64),
    pub values: Vec<f64>,
    pub tag: FieldTag,
}

impl Field {
    pub fn zeros(grid: &Grid2D) -> Self {
        Field {
            nx: grid.nx,
            ny: grid.ny,
            h: grid.h,
            origin: grid.origin,
            values: vec![0.0; grid.len()],
            tag: grid.policy,
        }
    }

    /// Samples `f` at every node of the grid that lies in Ω (zero elsewhere).
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for id in 0..grid.len() {
            if grid.kinds[id] != NodeKind::Exterior {
                let (x, y) = grid.coords(id);
                out.values[id] = f(x, y);
            }
        }
        out
    }

    /// Scatters unknown values and fills fixed truncation nodes from the side policy.
    pub fn from_unknowns(grid: &Grid2D, u: &[f64], data: &dyn Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for id in 0..grid.len() {
            out.values[id] = match grid.kinds[id] {
                NodeKind::Exterior => 0.0,
                _ if grid.index[id] != usize::MAX => u[grid.index[id]],
                _ => grid.truncation_value(id, data),
            };
        }
        out
    }

    /// Gathers the values at the unknowns of `grid`.
    pub fn unknown_values(&self, grid: &Grid2D) -> Vec<f64> {
        grid.unknowns.iter().map(|&id| self.values[id]).collect()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.h, self.origin.1 + j as f64 * self.h)
    }

    /// Bilinear interpolation; `None` outside the box.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let s = (x - self.origin.0) / self.h;
        let t = (y - self.origin.1) / self.h;
        let eps = 1e-9;
        if s < -eps || t < -eps || s > (self.nx - 1) as f64 + eps || t > (self.ny - 1) as f64 + eps {
            return None;
        }
        let i = (s.floor().max(0.0) as usize).min(self.nx - 2);
        let j = (t.floor().max(0.0) as usize).min(self.ny - 2);
        let (a, b) = (s - i as f64, t - j as f64);
        Some(
            (1.0 - a) * (1.0 - b) * self.at(i, j)
                + a * (1.0 - b) * self.at(i + 1, j)
                + (1.0 - a) * b * self.at(i, j + 1)
                + a * b * self.at(i + 1, j + 1),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "x,y,value").unwrap();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.coords(i, j);
                writeln!(out, "{x:.6},{y:.6},{:.17e}", self.at(i, j)).unwrap();
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::report::write_atomic(path, &self.to_csv_bytes())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.ny as u32).to_le_bytes());
        out.extend_from_slice(&self.h.to_le_bytes());
        out.extend_from_slice(&self.origin.0.to_le_bytes());
        out.extend_from_slice(&self.origin.1.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses the binary layout; the tag is not stored and comes back as all-zero Dirichlet.
    pub fn from_binary(bytes: &[u8]) -> Result<Field> {
        let bad = |m: &str| Error::Format(format!("field file: {m}"));
        if bytes.len() < 40 || &bytes[0..4] != MAGIC {
            return Err(bad("missing SPKF header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        if u32_at(4) != VERSION {
            return Err(bad("unsupported version"));
        }
        let nx = u32_at(8) as usize;
        let ny = u32_at(12) as usize;
        let h = f64_at(16);
        let origin = (f64_at(24), f64_at(32));
        if bytes.len() != 40 + 8 * nx * ny {
            return Err(bad("length does not match header"));
        }
        let values = (0..nx * ny).map(|k| f64_at(40 + 8 * k)).collect();
        Ok(Field {
            nx,
            ny,
            h,
            origin,
            values,
            tag: SidePolicy::uniform(super::SideBc::Zero),
        })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        crate::report::write_atomic(path, &self.to_binary())
    }

    pub fn read_binary(path: &Path) -> Result<Field> {
        Self::from_binary(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, BoxSpec, DomainSpec, SideBc};

    fn sample() -> (Grid2D, Field) {
        let g = build_grid(
            &DomainSpec::half_plane(),
            0.25,
            BoxSpec::new(-1.0, 1.0, -0.5, 1.0),
            SidePolicy::uniform(SideBc::One),
        )
        .unwrap();
        let f = Field::from_fn(&g, |x, y| 2.0 * x - y + 0.5);
        (g, f)
    }

    #[test]
    fn binary_roundtrip_and_layout() {
        let (_, f) = sample();
        let bytes = f.to_binary();
        assert_eq!(&bytes[0..4], b"SPKF");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 9);
        let back = Field::from_binary(&bytes).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.origin, f.origin);
        assert!(Field::from_binary(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn bilinear_is_exact_for_affine_data_inside_the_domain() {
        let (_, f) = sample();
        assert!((f.interpolate(0.13, 0.61).unwrap() - (0.26 - 0.61 + 0.5)).abs() < 1e-12);
        assert!(f.interpolate(5.0, 0.0).is_none());
    }

    #[test]
    fn truncation_values_follow_policy() {
        let (g, _) = sample();
        let u = vec![0.5; g.n_unknowns()];
        let f = Field::from_unknowns(&g, &u, &|_, _| 0.0);
        assert_eq!(f.at(0, 4), 1.0);
        assert_eq!(f.at(4, 0), 0.0);
        assert_eq!(f.at(4, 4), 0.5);
        let csv = String::from_utf8(f.to_csv_bytes()).unwrap();
        assert!(csv.starts_with("x,y,value\n"));
        assert_eq!(csv.lines().count(), 1 + g.len());
    }
}
