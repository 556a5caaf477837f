//! Unbounded planar domains: epigraphs `{y > φ(x)}`, cones, exteriors of balls.

mod field;
mod grid;

use std::f64::consts::PI;

use serde::Serialize;

pub use field::{Field, FieldTag};
pub use grid::{build_grid, BoxSpec, Grid2D, Link, NodeKind, Side, SideBc, SidePolicy, DIRS};

use crate::error::{Error, Result};

/// Boundary function of an epigraph.
#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    /// `φ = 0`.
    HalfPlane,
    /// Circular cone about the upward axis with opening angle `aperture`:
    /// `φ(x) = |x| cot(aperture / 2)`.
    Cone { aperture: f64 },
    /// `φ(x) = c x²`.
    Parabola { c: f64 },
    /// Piecewise-linear through samples, constant beyond the ends.
    Sampled { x: Vec<f64>, phi: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Epigraph(Boundary),
    /// Complement of the closed ball of radius `rho` centred at `(0, -ell)`.
    ExteriorBall { rho: f64, ell: f64 },
    /// Open disk of radius `radius` centred at `center`.
    Disk { center: (f64, f64), radius: f64 },
    /// The whole plane (used for periodic cells and eigenvalue boxes).
    FullSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
}

/// Summary flags derived from the geometry.
#[derive(Clone, Debug, Serialize)]
pub struct DomainFlags {
    pub lipschitz: Option<f64>,
    pub bounded_below: bool,
    /// Contains a translate of `{y > -α|x|}` for some `α > 0`.
    pub aperture_gt_pi: bool,
    /// `α` for cones of aperture above π.
    pub alpha: Option<f64>,
    /// `(ρ, ℓ)` of the excluded ball for exterior domains.
    pub excluded_ball: Option<(f64, f64)>,
}

impl DomainSpec {
    pub fn half_plane() -> Self {
        DomainSpec {
            kind: DomainKind::Epigraph(Boundary::HalfPlane),
        }
    }

    pub fn cone(aperture: f64) -> Result<Self> {
        if !(aperture > 0.0 && aperture < 2.0 * PI) {
            return Err(Error::Domain(format!("cone aperture {aperture} outside (0, 2π)")));
        }
        Ok(DomainSpec {
            kind: DomainKind::Epigraph(Boundary::Cone { aperture }),
        })
    }

    pub fn parabola(c: f64) -> Self {
        DomainSpec {
            kind: DomainKind::Epigraph(Boundary::Parabola { c }),
        }
    }

    pub fn sampled(x: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if x.len() != phi.len() || x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("sampled boundary needs ≥ 2 increasing abscissae".into()));
        }
        Ok(DomainSpec {
            kind: DomainKind::Epigraph(Boundary::Sampled { x, phi }),
        })
    }

    pub fn exterior_ball(rho: f64, ell: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("ball radius {rho} must be positive")));
        }
        Ok(DomainSpec {
            kind: DomainKind::ExteriorBall { rho, ell },
        })
    }

    pub fn disk(center: (f64, f64), radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("disk radius {radius} must be positive")));
        }
        Ok(DomainSpec {
            kind: DomainKind::Disk { center, radius },
        })
    }

    pub fn full_space() -> Self {
        DomainSpec {
            kind: DomainKind::FullSpace,
        }
    }

    /// Reads `x,phi` samples from CSV (header line allowed).
    pub fn sampled_from_csv(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut x = Vec::new();
        let mut phi = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            match (parts.first().map(|s| s.parse::<f64>()), parts.get(1).map(|s| s.parse::<f64>())) {
                (Some(Ok(a)), Some(Ok(b))) => {
                    x.push(a);
                    phi.push(b);
                }
                _ if n == 0 => continue,
                _ => return Err(Error::Format(format!("line {}: expected `x,phi`", n + 1))),
            }
        }
        Self::sampled(x, phi)
    }

    /// Aperture of the cone, if this is one.
    pub fn aperture(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::Epigraph(Boundary::Cone { aperture }) => Some(*aperture),
            DomainKind::Epigraph(Boundary::HalfPlane) => Some(PI),
            _ => None,
        }
    }

    /// Boundary function of an epigraph.
    pub fn phi(&self, x: f64) -> Option<f64> {
        match &self.kind {
            DomainKind::Epigraph(b) => Some(match b {
                Boundary::HalfPlane => 0.0,
                Boundary::Cone { aperture } => x.abs() / (aperture / 2.0).tan(),
                Boundary::Parabola { c } => c * x * x,
                Boundary::Sampled { x: xs, phi } => {
                    if x <= xs[0] {
                        phi[0]
                    } else if x >= *xs.last().unwrap() {
                        *phi.last().unwrap()
                    } else {
                        let k = xs.partition_point(|&v| v <= x) - 1;
                        let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                        phi[k] + t * (phi[k + 1] - phi[k])
                    }
                }
            }),
            _ => None,
        }
    }

    /// Level function: positive exactly in Ω, zero on ∂Ω. Not a distance in general.
    pub fn level(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            DomainKind::Epigraph(_) => y - self.phi(x).unwrap(),
            DomainKind::ExteriorBall { rho, ell } => (x * x + (y + ell) * (y + ell)).sqrt() - rho,
            DomainKind::Disk { center, radius } => radius - ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt(),
            DomainKind::FullSpace => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.level(x, y) > 0.0
    }

    /// Signed Euclidean distance to ∂Ω, positive inside.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        let sign = if self.level(x, y) >= 0.0 { 1.0 } else { -1.0 };
        let dist = match &self.kind {
            DomainKind::FullSpace => return f64::INFINITY,
            DomainKind::ExteriorBall { .. } | DomainKind::Disk { .. } => return self.level(x, y),
            DomainKind::Epigraph(b) => match b {
                Boundary::HalfPlane => y.abs(),
                Boundary::Cone { aperture } => {
                    let (s, c) = (aperture / 2.0).sin_cos();
                    // boundary rays from the vertex along (±sin, cos)
                    ray_distance(x, y, s, c).min(ray_distance(x, y, -s, c))
                }
                Boundary::Sampled { x: xs, phi } => {
                    let mut best = f64::INFINITY;
                    for k in 0..xs.len() - 1 {
                        best = best.min(segment_distance(x, y, (xs[k], phi[k]), (xs[k + 1], phi[k + 1])));
                    }
                    let (a, fa) = (xs[0], phi[0]);
                    let (b, fb) = (*xs.last().unwrap(), *phi.last().unwrap());
                    best = best.min(ray_distance(x - a, y - fa, -1.0, 0.0));
                    best.min(ray_distance(x - b, y - fb, 1.0, 0.0))
                }
                Boundary::Parabola { c } => parabola_distance(*c, x, y),
            },
        };
        sign * dist
    }

    pub fn flags(&self) -> DomainFlags {
        let mut flags = DomainFlags {
            lipschitz: None,
            bounded_below: false,
            aperture_gt_pi: false,
            alpha: None,
            excluded_ball: None,
        };
        match &self.kind {
            DomainKind::Epigraph(b) => match b {
                Boundary::HalfPlane => {
                    flags.lipschitz = Some(0.0);
                    flags.bounded_below = true;
                }
                Boundary::Cone { aperture } => {
                    let cot = 1.0 / (aperture / 2.0).tan();
                    flags.lipschitz = Some(cot.abs());
                    flags.bounded_below = *aperture <= PI;
                    flags.aperture_gt_pi = *aperture > PI;
                    if *aperture > PI {
                        flags.alpha = Some(-cot);
                    }
                }
                Boundary::Parabola { c } => {
                    flags.bounded_below = *c >= 0.0;
                    flags.aperture_gt_pi = *c < 0.0;
                    if *c == 0.0 {
                        flags.lipschitz = Some(0.0);
                    }
                }
                Boundary::Sampled { x, phi } => {
                    let lip = x
                        .windows(2)
                        .zip(phi.windows(2))
                        .map(|(a, b)| ((b[1] - b[0]) / (a[1] - a[0])).abs())
                        .fold(0.0, f64::max);
                    flags.lipschitz = Some(lip);
                    flags.bounded_below = true;
                }
            },
            DomainKind::ExteriorBall { rho, ell } => {
                flags.aperture_gt_pi = true;
                flags.excluded_ball = Some((*rho, *ell));
            }
            DomainKind::Disk { .. } => {}
            DomainKind::FullSpace => {
                flags.lipschitz = Some(0.0);
                flags.aperture_gt_pi = true;
            }
        }
        flags
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            DomainKind::Epigraph(Boundary::HalfPlane) => "half-plane".into(),
            DomainKind::Epigraph(Boundary::Cone { aperture }) => format!("cone aperture {:.6}π", aperture / PI),
            DomainKind::Epigraph(Boundary::Parabola { c }) => format!("parabola c = {c}"),
            DomainKind::Epigraph(Boundary::Sampled { x, .. }) => format!("sampled epigraph ({} points)", x.len()),
            DomainKind::ExteriorBall { rho, ell } => format!("exterior ball ρ = {rho}, ℓ = {ell}"),
            DomainKind::Disk { radius, .. } => format!("disk radius {radius}"),
            DomainKind::FullSpace => "full plane".into(),
        }
    }
}

/// Distance from `(x, y)` to the ray `t (dx, dy)`, `t ≥ 0`, `(dx, dy)` a unit vector.
fn ray_distance(x: f64, y: f64, dx: f64, dy: f64) -> f64 {
    let t = (x * dx + y * dy).max(0.0);
    ((x - t * dx).powi(2) + (y - t * dy).powi(2)).sqrt()
}

fn segment_distance(x: f64, y: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
    let len2 = ex * ex + ey * ey;
    let t = (((x - a.0) * ex + (y - a.1) * ey) / len2).clamp(0.0, 1.0);
    ((x - a.0 - t * ex).powi(2) + (y - a.1 - t * ey).powi(2)).sqrt()
}

fn parabola_distance(c: f64, x: f64, y: f64) -> f64 {
    let d2 = |s: f64| (s - x).powi(2) + (c * s * s - y).powi(2);
    let reach = (y - c * x * x).abs() + 1.0;
    let (lo, hi) = (x - reach, x + reach);
    let n = 400;
    let mut best = (x, d2(x));
    for k in 0..=n {
        let s = lo + (hi - lo) * k as f64 / n as f64;
        let v = d2(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = b - g * (b - a);
        let m2 = a + g * (b - a);
        if d2(m1) < d2(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    d2(0.5 * (a + b)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(DomainSpec::half_plane().signed_distance(3.0, 2.0), 2.0);
        let ball = DomainSpec::exterior_ball(1.0, 2.0).unwrap();
        assert_relative_eq!(ball.signed_distance(0.0, 0.0), 1.0);
        assert!(!ball.contains(0.0, -2.0));
        let cone = DomainSpec::cone(1.5 * PI).unwrap();
        // boundary y = -|x|: point-to-line distance |x + y| / √2
        assert_relative_eq!(cone.signed_distance(2.0, -1.0), 0.5f64.sqrt(), max_relative = 1e-14);
        // nearest boundary point of (0, 1) is the vertex
        assert_relative_eq!(cone.signed_distance(0.0, 1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(cone.signed_distance(0.0, -3.0), -1.5 * 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn straight_cone_is_half_plane() {
        let cone = DomainSpec::cone(PI).unwrap();
        for eps in [1e-9, 1e-3, 0.5] {
            assert!(!cone.contains(0.0, -eps));
            assert!(!cone.contains(7.0, -eps));
        }
        assert!(!cone.flags().aperture_gt_pi);
        assert!(DomainSpec::cone(1.05 * PI).unwrap().flags().aperture_gt_pi);
    }

    #[test]
    fn flags() {
        let f = DomainSpec::cone(1.5 * PI).unwrap().flags();
        assert_relative_eq!(f.alpha.unwrap(), 1.0, max_relative = 1e-12);
        assert!(!f.bounded_below);
        let f = DomainSpec::half_plane().flags();
        assert!(f.bounded_below && f.lipschitz == Some(0.0));
        let f = DomainSpec::exterior_ball(1.0, 2.0).unwrap().flags();
        assert_eq!(f.excluded_ball, Some((1.0, 2.0)));
    }

    #[test]
    fn parabola_distance_matches_sampled_polyline() {
        let par = DomainSpec::parabola(0.3);
        let xs: Vec<f64> = (0..=4000).map(|k| -20.0 + k as f64 * 0.01).collect();
        let ph: Vec<f64> = xs.iter().map(|x| 0.3 * x * x).collect();
        let poly = DomainSpec::sampled(xs, ph).unwrap();
        for &(x, y) in &[(0.0, 2.0), (1.5, -0.7), (-2.0, 4.0)] {
            assert_relative_eq!(par.signed_distance(x, y), poly.signed_distance(x, y), epsilon = 1e-4);
        }
    }

    proptest! {
        #[test]
        fn distance_is_monotone_in_height(
            x in -5.0f64..5.0, y in -5.0f64..5.0, dy in 0.0f64..3.0, a in 0.3f64..1.9,
        ) {
            for spec in [DomainSpec::cone(a * PI).unwrap(), DomainSpec::parabola(a - 1.0), DomainSpec::half_plane()] {
                let lo = spec.signed_distance(x, y);
                let hi = spec.signed_distance(x, y + dy);
                prop_assert!(hi >= lo - 1e-9, "{:?}: {} < {}", spec.kind, hi, lo);
            }
        }

        #[test]
        fn distance_is_one_lipschitz(
            x in -5.0f64..5.0, y in -5.0f64..5.0, dx in -0.5f64..0.5, dy in -0.5f64..0.5, a in 0.3f64..1.9,
        ) {
            let spec = DomainSpec::cone(a * PI).unwrap();
            let d = spec.signed_distance(x, y) - spec.signed_distance(x + dx, y + dy);
            prop_assert!(d.abs() <= (dx * dx + dy * dy).sqrt() + 1e-12);
        }
    }
}
