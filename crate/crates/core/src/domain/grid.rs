use serde::Serialize;

use super::DomainSpec;
use crate::error::{Error, Result};

/// Treatment of one side of the truncation box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideBc {
    /// Dirichlet value 0.
    Zero,
    /// Dirichlet value 1.
    One,
    /// Homogeneous Neumann; the side nodes become unknowns with half cells.
    Neumann,
    /// Dirichlet value supplied by the caller's boundary function.
    Data,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SidePolicy {
    pub left: SideBc,
    pub right: SideBc,
    pub bottom: SideBc,
    pub top: SideBc,
}

impl SidePolicy {
    pub fn uniform(bc: SideBc) -> Self {
        SidePolicy {
            left: bc,
            right: bc,
            bottom: bc,
            top: bc,
        }
    }

    pub fn get(&self, side: Side) -> SideBc {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
            Side::Top => self.top,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// On or outside ∂Ω.
    Exterior,
    /// Strictly inside Ω and strictly inside the box.
    Interior,
    /// Inside Ω on the box edge; the side whose condition applies.
    Truncation(Side),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoxSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        BoxSpec { x0, x1, y0, y1 }
    }
}

/// Where the stencil arm of an unknown leads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    Unknown(usize),
    /// Dirichlet truncation node (node id).
    Fixed(usize),
    /// Physical boundary crossed at fraction `θ ∈ (0, 1]` of the arm.
    Boundary(f64),
    /// Neumann mirror: no flux.
    Mirror,
}

/// Uniform node grid over a box, masked by a domain.
#[derive(Clone, Debug)]
pub struct Grid2D {
    pub spec: DomainSpec,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin: (f64, f64),
    pub policy: SidePolicy,
    pub kinds: Vec<NodeKind>,
    /// Unknown number of each node (`usize::MAX` if not an unknown).
    pub index: Vec<usize>,
    /// Node id of each unknown.
    pub unknowns: Vec<usize>,
    /// Stencil arms of each unknown in the order +x, -x, +y, -y.
    pub links: Vec<[Link; 4]>,
    /// Smallest admissible boundary fraction.
    pub theta_floor: f64,
}

pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Builds the grid; every node `(x0 + i h, y0 + j h)` is classified.
pub fn build_grid(spec: &DomainSpec, h: f64, bx: BoxSpec, policy: SidePolicy) -> Result<Grid2D> {
    if !(h > 0.0) || !(bx.x1 > bx.x0 && bx.y1 > bx.y0) {
        return Err(Error::Domain("grid spacing and box must be positive".into()));
    }
    let nx = ((bx.x1 - bx.x0) / h).round() as usize + 1;
    let ny = ((bx.y1 - bx.y0) / h).round() as usize + 1;
    if nx < 3 || ny < 3 {
        return Err(Error::DegenerateDomain("box narrower than three nodes".into()));
    }
    let mut g = Grid2D {
        spec: spec.clone(),
        h,
        nx,
        ny,
        origin: (bx.x0, bx.y0),
        policy,
        kinds: Vec::with_capacity(nx * ny),
        index: vec![usize::MAX; nx * ny],
        unknowns: Vec::new(),
        links: Vec::new(),
        theta_floor: 1e-3,
    };
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = g.coords(g.id(i, j));
            let kind = if !spec.contains(x, y) {
                NodeKind::Exterior
            } else {
                let mut sides = Vec::new();
                if j == 0 {
                    sides.push(Side::Bottom);
                }
                if j == ny - 1 {
                    sides.push(Side::Top);
                }
                if i == 0 {
                    sides.push(Side::Left);
                }
                if i == nx - 1 {
                    sides.push(Side::Right);
                }
                match sides
                    .iter()
                    .find(|&&s| policy.get(s) != SideBc::Neumann)
                    .or(sides.first())
                {
                    None => NodeKind::Interior,
                    Some(&s) => NodeKind::Truncation(s),
                }
            };
            g.kinds.push(kind);
        }
    }
    let order: Vec<usize> = if nx <= ny {
        (0..nx * ny).collect()
    } else {
        (0..nx).flat_map(|i| (0..ny).map(move |j| j * nx + i)).collect()
    };
    for id in order {
        if g.is_unknown_kind(id) {
            g.index[id] = g.unknowns.len();
            g.unknowns.push(id);
        }
    }
    if g.unknowns.is_empty() {
        return Err(Error::DegenerateDomain(format!(
            "no interior nodes of {} in the box",
            spec.describe()
        )));
    }
    let links: Vec<[Link; 4]> = g.unknowns.iter().map(|&id| g.compute_links(id)).collect();
    g.links = links;
    Ok(g)
}

impl Grid2D {
    #[inline]
    pub fn id(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, id: usize) -> (usize, usize) {
        (id % self.nx, id / self.nx)
    }

    pub fn coords(&self, id: usize) -> (f64, f64) {
        let (i, j) = self.ij(id);
        (self.origin.0 + i as f64 * self.h, self.origin.1 + j as f64 * self.h)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.nx * self.ny == 0
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    fn is_unknown_kind(&self, id: usize) -> bool {
        match self.kinds[id] {
            NodeKind::Interior => true,
            NodeKind::Truncation(s) => self.policy.get(s) == SideBc::Neumann,
            NodeKind::Exterior => false,
        }
    }

    /// Number of nodes strictly inside Ω and strictly inside the box.
    pub fn interior_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Interior).count()
    }

    fn compute_links(&self, id: usize) -> [Link; 4] {
        let (i, j) = self.ij(id);
        let mut out = [Link::Mirror; 4];
        for (k, (di, dj)) in DIRS.iter().enumerate() {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
                out[k] = Link::Mirror;
                continue;
            }
            let q = self.id(ni as usize, nj as usize);
            out[k] = match self.kinds[q] {
                NodeKind::Exterior => Link::Boundary(self.crossing(id, q)),
                _ if self.index[q] != usize::MAX => Link::Unknown(self.index[q]),
                _ => Link::Fixed(q),
            };
        }
        out
    }

    /// Fraction along `p → q` where the level function vanishes.
    fn crossing(&self, p: usize, q: usize) -> f64 {
        let (px, py) = self.coords(p);
        let (qx, qy) = self.coords(q);
        let lv = |t: f64| self.spec.level(px + t * (qx - px), py + t * (qy - py));
        let (mut a, mut b) = (0.0, 1.0);
        if lv(1.0) > 0.0 {
            return 1.0;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if lv(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        (0.5 * (a + b)).max(self.theta_floor)
    }

    /// Half-cell factors `(fx, fy)` of a node on Neumann sides.
    pub fn cell_factors(&self, id: usize) -> (f64, f64) {
        let (i, j) = self.ij(id);
        let fx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let fy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        (fx, fy)
    }

    /// Dirichlet value prescribed at a fixed truncation node.
    pub fn truncation_value(&self, id: usize, data: &dyn Fn(f64, f64) -> f64) -> f64 {
        match self.kinds[id] {
            NodeKind::Truncation(s) => match self.policy.get(s) {
                SideBc::Zero => 0.0,
                SideBc::One => 1.0,
                SideBc::Data => {
                    let (x, y) = self.coords(id);
                    data(x, y)
                }
                SideBc::Neumann => f64::NAN,
            },
            _ => 0.0,
        }
    }

    /// Nearest node to `(x, y)`, if inside the box.
    pub fn nearest_node(&self, x: f64, y: f64) -> Option<usize> {
        let i = ((x - self.origin.0) / self.h).round();
        let j = ((y - self.origin.1) / self.h).round();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some(self.id(i as usize, j as usize))
    }

    /// Size of the connected set of unknowns containing the node nearest `anchor`.
    pub fn component_size(&self, anchor: (f64, f64)) -> usize {
        let Some(start) = self.nearest_node(anchor.0, anchor.1) else {
            return 0;
        };
        let s = self.index[start];
        if s == usize::MAX {
            return 0;
        }
        let mut seen = vec![false; self.n_unknowns()];
        let mut stack = vec![s];
        seen[s] = true;
        let mut count = 0;
        while let Some(k) = stack.pop() {
            count += 1;
            for l in &self.links[k] {
                if let Link::Unknown(q) = *l {
                    if !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn half_plane_counts() {
        let bx = BoxSpec::new(-1.0, 1.0, -1.0, 1.0);
        let g = build_grid(&DomainSpec::half_plane(), 0.1, bx, SidePolicy::uniform(SideBc::Zero)).unwrap();
        // x ∈ {-0.9..0.9}, y ∈ {0.1..0.9}
        assert_eq!(g.interior_count(), 19 * 9);
        assert_eq!(g.n_unknowns(), 19 * 9);
        let mut pol = SidePolicy::uniform(SideBc::Zero);
        pol.top = SideBc::Neumann;
        let g = build_grid(&DomainSpec::half_plane(), 0.1, bx, pol).unwrap();
        assert_eq!(g.n_unknowns(), 19 * 10);
        assert!(g.component_size((0.0, 0.5)) == 190);
    }

    #[test]
    fn exterior_nodes() {
        let bx = BoxSpec::new(-3.0, 3.0, -4.0, 3.0);
        let pol = SidePolicy::uniform(SideBc::Zero);
        let g = build_grid(&DomainSpec::exterior_ball(1.0, 2.0).unwrap(), 0.1, bx, pol).unwrap();
        let c = g.nearest_node(0.0, -2.0).unwrap();
        assert_eq!(g.kinds[c], NodeKind::Exterior);
        let g = build_grid(&DomainSpec::cone(PI).unwrap(), 0.1, bx, pol).unwrap();
        for j in 0..g.ny {
            let id = g.id(g.nx / 2, j);
            let (_, y) = g.coords(id);
            if y < 1e-12 {
                assert_eq!(g.kinds[id], NodeKind::Exterior);
            }
        }
    }

    #[test]
    fn empty_box_is_degenerate() {
        let bx = BoxSpec::new(-1.0, 1.0, -3.0, -1.0);
        let r = build_grid(&DomainSpec::half_plane(), 0.1, bx, SidePolicy::uniform(SideBc::Zero));
        assert!(matches!(r, Err(Error::DegenerateDomain(_))));
    }

    #[test]
    fn crossing_fractions_on_a_cone() {
        let spec = DomainSpec::cone(1.25 * PI).unwrap();
        let bx = BoxSpec::new(-4.0, 4.0, -3.0, 3.0);
        let g = build_grid(&spec, 0.1, bx, SidePolicy::uniform(SideBc::Zero)).unwrap();
        for (k, &id) in g.unknowns.iter().enumerate() {
            let (x, y) = g.coords(id);
            for (dir, l) in g.links[k].iter().enumerate() {
                if let Link::Boundary(t) = *l {
                    let (dx, dy) = DIRS[dir];
                    let px = x + t * g.h * dx as f64;
                    let py = y + t * g.h * dy as f64;
                    assert!(spec.level(px, py).abs() < 1e-9 || t == g.theta_floor);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn refinement_keeps_status_far_from_boundary(a in 0.6f64..1.6, i in 0usize..40, j in 0usize..40) {
            let spec = DomainSpec::cone(a * PI).unwrap();
            let bx = BoxSpec::new(-2.0, 2.0, -2.0, 2.0);
            let pol = SidePolicy::uniform(SideBc::Zero);
            let coarse = build_grid(&spec, 0.1, bx, pol);
            let fine = build_grid(&spec, 0.05, bx, pol);
            if let (Ok(c), Ok(f)) = (coarse, fine) {
                let id = c.id(i, j);
                let (x, y) = c.coords(id);
                if spec.signed_distance(x, y).abs() > 2.0 * c.h {
                    let fid = f.id(2 * i, 2 * j);
                    prop_assert_eq!(c.kinds[id] == NodeKind::Exterior, f.kinds[fid] == NodeKind::Exterior);
                }
            }
        }
    }
}
