//! Reaction terms `f`, the nonlinear part `g(u) = f(u) + u`, and their classification.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Shape of the reaction term before any rescaling.
#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// `u (u - θ) (1 - u)`.
    BistableCubic { theta: f64 },
    /// `-u + |u|^p sign(u)`.
    PowerField { p: f64 },
    /// Monotone cubic interpolant of sampled `(u, f(u))` pairs.
    Tabulated(Table),
}

/// Sampled reaction term with Fritsch–Carlson slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    u: Vec<f64>,
    f: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(u: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if u.len() != f.len() || u.len() < 4 {
            return Err(Error::InvalidNonlinearity(
                "table needs at least 4 (u, f) pairs".into(),
            ));
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidNonlinearity(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        if u[0] > 0.0 {
            return Err(Error::InvalidNonlinearity("table must cover u = 0".into()));
        }
        if u.iter().chain(f.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNonlinearity("non-finite table entry".into()));
        }
        let slopes = pchip_slopes(&u, &f);
        Ok(Table { u, f, slopes })
    }

    /// Reads a two-column CSV `u,f` (a non-numeric first line is treated as a header).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut u = Vec::new();
        let mut f = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Format(format!("line {}: expected `u,f`", n + 1))),
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    u.push(x);
                    f.push(y);
                }
                _ if u.is_empty() && n == 0 => continue,
                _ => return Err(Error::Format(format!("line {}: not a number pair", n + 1))),
            }
        }
        Table::new(u, f)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.u[0], *self.u.last().unwrap())
    }

    fn locate(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfRange { value: x, lo, hi });
        }
        let k = self.u.partition_point(|&v| v <= x);
        Ok(k.clamp(1, self.u.len() - 1) - 1)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let k = self.locate(x)?;
        let h = self.u[k + 1] - self.u[k];
        let t = (x - self.u[k]) / h;
        let (y0, y1) = (self.f[k], self.f[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let val = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let der = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        Ok((val, der / h))
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

/// Which hypothesis family a reaction term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bistable,
    Field,
}

/// Reaction term `f(u) = raw(u) / scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    pub kind: Kind,
    /// Cumulative factor `f` was divided by.
    pub scale: f64,
    /// Hölder exponent of `f'`, carried as metadata.
    pub hoelder: f64,
}

impl Nonlinearity {
    pub fn bistable_cubic(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "bistable θ = {theta} must lie in (0, 1)"
            )));
        }
        Ok(Nonlinearity {
            kind: Kind::BistableCubic { theta },
            scale: 1.0,
            hoelder: 1.0,
        })
    }

    pub fn power_field(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidNonlinearity(format!(
                "power exponent p = {p} must exceed 1"
            )));
        }
        Ok(Nonlinearity {
            kind: Kind::PowerField { p },
            scale: 1.0,
            hoelder: (p - 1.0).min(1.0),
        })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        let nl = Nonlinearity {
            kind: Kind::Tabulated(table),
            scale: 1.0,
            hoelder: 1.0,
        };
        if nl.raw(0.0)?.0.abs() > 1e-12 {
            return Err(Error::InvalidNonlinearity("tabulated f(0) must vanish".into()));
        }
        Ok(nl)
    }

    fn raw(&self, u: f64) -> Result<(f64, f64)> {
        Ok(match &self.kind {
            Kind::BistableCubic { theta } => {
                let t = *theta;
                let v = u * (u - t) * (1.0 - u);
                let d = -3.0 * u * u + 2.0 * (1.0 + t) * u - t;
                (v, d)
            }
            Kind::PowerField { p } => {
                let a = u.abs();
                let v = -u + a.powf(*p) * u.signum();
                let d = -1.0 + p * a.powf(p - 1.0);
                (v, d)
            }
            Kind::Tabulated(t) => t.eval(u)?,
        })
    }

    /// `f(u)`; fails only for tabulated terms outside the table.
    pub fn try_f(&self, u: f64) -> Result<f64> {
        Ok(self.raw(u)?.0 / self.scale)
    }

    /// `f'(u)`.
    pub fn try_df(&self, u: f64) -> Result<f64> {
        Ok(self.raw(u)?.1 / self.scale)
    }

    /// `f(u)`; tabulated terms are clamped to their table range.
    pub fn f(&self, u: f64) -> f64 {
        self.try_f(self.clamp(u)).expect("clamped argument")
    }

    pub fn df(&self, u: f64) -> f64 {
        self.try_df(self.clamp(u)).expect("clamped argument")
    }

    /// Nonlinear part `g(u) = f(u) + u`.
    pub fn g(&self, u: f64) -> f64 {
        self.f(u) + u
    }

    pub fn dg(&self, u: f64) -> f64 {
        self.df(u) + 1.0
    }

    fn clamp(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Tabulated(t) => {
                let (lo, hi) = t.range();
                u.clamp(lo, hi)
            }
            _ => u,
        }
    }

    /// Divides `f` by `|f'(0)|` so that `f'(0) = -1` afterwards.
    pub fn normalize(&self) -> Result<Self> {
        let d0 = self.try_df(0.0)?;
        if !(d0 < 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "f'(0) = {d0} is not negative"
            )));
        }
        let mut out = self.clone();
        out.scale = self.scale * d0.abs();
        Ok(out)
    }

    /// Factor by which lengths are multiplied when passing to normalized units.
    pub fn spatial_factor(&self) -> f64 {
        self.scale.sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        self.try_df(0.0).map(|d| (d + 1.0).abs() < 1e-12).unwrap_or(false)
    }

    /// Positive roots in increasing order (θ, then 1 for bistable terms).
    pub fn positive_roots(&self) -> Vec<f64> {
        match &self.kind {
            Kind::BistableCubic { theta } => vec![*theta, 1.0],
            Kind::PowerField { .. } => vec![1.0],
            Kind::Tabulated(t) => {
                let (lo, hi) = t.range();
                let n = 4000;
                let mut roots = Vec::new();
                let lo = lo.max(0.0);
                let step = (hi - lo) / n as f64;
                let mut a = lo + 1e-9 * (hi - lo).max(1.0);
                let mut fa = self.f(a);
                for k in 1..=n {
                    let b = lo + k as f64 * step;
                    let fb = self.f(b);
                    if fb == 0.0 && k < n {
                        roots.push(b);
                    } else if fa * fb < 0.0 {
                        roots.push(bisect(|x| self.f(x), a, b));
                    }
                    a = b;
                    fa = fb;
                }
                roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
                roots
            }
        }
    }

    /// Hypothesis family implied by the sign pattern, if any.
    pub fn family(&self) -> Option<Family> {
        match &self.kind {
            Kind::BistableCubic { .. } => Some(Family::Bistable),
            Kind::PowerField { .. } => Some(Family::Field),
            Kind::Tabulated(_) => match self.positive_roots().len() {
                1 => Some(Family::Field),
                2 => Some(Family::Bistable),
                _ => None,
            },
        }
    }

    /// `max |f'|` sampled on `[lo, hi]`.
    pub fn lipschitz(&self, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        (0..=n)
            .map(|k| self.df(lo + (hi - lo) * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Checks every sign condition of the matching hypothesis on a uniform grid.
    pub fn classify(&self, resolution: usize) -> ClassificationReport {
        let resolution = resolution.max(100);
        let family = self.family();
        let roots = self.positive_roots();
        let mut conds = Vec::new();
        let mut push = |name: &str, passed: bool, value: f64| {
            conds.push(Condition {
                name: name.to_string(),
                passed,
                value,
            })
        };
        let f0 = self.f(0.0);
        let d0 = self.df(0.0);
        push("f(0) = 0", f0.abs() < 1e-12, f0);
        push("f'(0) < 0", d0 < 0.0, d0);
        let top = 1.5 * roots.last().copied().unwrap_or(1.0);
        let top = match &self.kind {
            Kind::Tabulated(t) => top.min(t.range().1),
            _ => top,
        };
        let grid: Vec<f64> = (1..=resolution)
            .map(|k| top * k as f64 / resolution as f64)
            .collect();
        let away = |u: f64| roots.iter().all(|r| (u - r).abs() > 1e-9);
        let sign_on = |lo: f64, hi: f64, want: f64| -> (bool, f64) {
            let mut worst = f64::INFINITY;
            for &u in grid.iter().filter(|&&u| u > lo && u < hi && away(u)) {
                worst = worst.min(want * self.f(u));
            }
            (worst > 0.0, if worst.is_finite() { worst } else { 0.0 })
        };
        let mut integral = None;
        match (family, roots.as_slice()) {
            (Some(Family::Bistable), &[theta, one]) => {
                let ft = self.f(theta);
                let f1 = self.f(one);
                push("f(θ) = 0", ft.abs() < 1e-12, ft);
                push("f(1) = 0", f1.abs() < 1e-12, f1);
                push("f'(θ) > 0", self.df(theta) > 0.0, self.df(theta));
                push("f'(1) < 0", self.df(one) < 0.0, self.df(one));
                let (ok, v) = sign_on(0.0, theta, -1.0);
                push("f < 0 on (0, θ)", ok, v);
                let (ok, v) = sign_on(theta, one, 1.0);
                push("f > 0 on (θ, 1)", ok, v);
                let (ok, v) = sign_on(one, f64::INFINITY, -1.0);
                push("f < 0 on (1, ∞)", ok, v);
                let i = simpson(|u| self.f(u), 0.0, one, resolution);
                push("∫₀¹ f > 0", i > 0.0, i);
                integral = Some(i);
            }
            (Some(Family::Field), &[theta]) => {
                let ft = self.f(theta);
                push("f(θ) = 0", ft.abs() < 1e-12, ft);
                push("f'(θ) > 0", self.df(theta) > 0.0, self.df(theta));
                let (ok, v) = sign_on(0.0, theta, -1.0);
                push("f < 0 on (0, θ)", ok, v);
                let (ok, v) = sign_on(theta, f64::INFINITY, 1.0);
                push("f > 0 on (θ, ∞)", ok, v);
            }
            _ => push("recognizable sign pattern", false, roots.len() as f64),
        }
        let accepted = conds.iter().all(|c| c.passed);
        ClassificationReport {
            family,
            roots,
            conditions: conds,
            integral,
            accepted,
        }
    }
}

/// One checked hypothesis condition.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    /// Measured quantity (worst signed margin, root residual, or integral).
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub family: Option<Family>,
    pub roots: Vec<f64>,
    pub conditions: Vec<Condition>,
    pub integral: Option<f64>,
    pub accepted: bool,
}

impl ClassificationReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn evaluation_examples() {
        let c = Nonlinearity::bistable_cubic(0.25).unwrap();
        assert_relative_eq!(c.f(0.5), 0.0625);
        assert_eq!(c.f(1.0), 0.0);
        let p = Nonlinearity::power_field(3.0).unwrap();
        assert_relative_eq!(p.f(2.0), 6.0);
        assert_relative_eq!(p.g(2.0), 8.0);
    }

    #[test]
    fn normalization_scales() {
        for theta in [0.25, 0.1] {
            let n = Nonlinearity::bistable_cubic(theta).unwrap().normalize().unwrap();
            // f'(0) = -θ by differentiating u(u-θ)(1-u)
            assert_relative_eq!(n.scale, theta);
            assert_eq!(n.df(0.0), -1.0);
            assert_relative_eq!(n.f(0.5), 0.5 * (0.5 - theta) * 0.5 / theta);
        }
        let p = Nonlinearity::power_field(2.0).unwrap();
        assert_eq!(p.normalize().unwrap(), p);
    }

    #[test]
    fn normalize_rejects_nonnegative_slope() {
        let t = Table::new(vec![0.0, 0.5, 1.0, 1.5], vec![0.0, 0.2, 0.1, -0.3]).unwrap();
        let nl = Nonlinearity::tabulated(t).unwrap();
        assert!(matches!(nl.normalize(), Err(Error::InvalidNonlinearity(_))));
    }

    #[test]
    fn classification_examples() {
        let r = Nonlinearity::bistable_cubic(0.25).unwrap().classify(1000);
        assert!(r.accepted);
        assert_eq!(r.family, Some(Family::Bistable));
        // ∫₀¹ u(u-θ)(1-u) du = 1/12 - θ/6
        assert_relative_eq!(r.integral.unwrap(), 1.0 / 12.0 - 0.25 / 6.0, max_relative = 1e-12);

        let r = Nonlinearity::bistable_cubic(0.6).unwrap().classify(1000);
        assert!(!r.accepted);
        let c = r.condition("∫₀¹ f > 0").unwrap();
        assert!(!c.passed);
        assert_relative_eq!(c.value, 1.0 / 12.0 - 0.1, max_relative = 1e-12);

        let r = Nonlinearity::power_field(2.0).unwrap().classify(1000);
        assert!(r.accepted);
        assert_eq!(r.family, Some(Family::Field));
    }

    #[test]
    fn tabulated_reproduces_cubic() {
        let theta = 0.25;
        let u: Vec<f64> = (0..=300).map(|k| k as f64 * 0.005).collect();
        let f: Vec<f64> = u.iter().map(|&x| x * (x - theta) * (1.0 - x)).collect();
        let nl = Nonlinearity::tabulated(Table::new(u, f).unwrap()).unwrap();
        assert_relative_eq!(nl.f(0.37), 0.37 * 0.12 * 0.63, epsilon = 1e-6);
        let roots = nl.positive_roots();
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], 0.25, epsilon = 1e-6);
        assert!(nl.classify(500).accepted);
        assert!(matches!(nl.try_f(2.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn csv_table_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut text = String::from("u,f\n");
        for k in 0..=40 {
            let u = k as f64 * 0.05;
            text.push_str(&format!("{u},{}\n", -u + u * u));
        }
        std::fs::write(&path, text).unwrap();
        let nl = Nonlinearity::tabulated(Table::from_csv(&path).unwrap()).unwrap();
        assert_eq!(nl.family(), Some(Family::Field));
        assert_relative_eq!(nl.positive_roots()[0], 1.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(theta in 0.01f64..0.49, p in 1.1f64..6.0) {
            for nl in [Nonlinearity::bistable_cubic(theta).unwrap(), Nonlinearity::power_field(p).unwrap()] {
                let once = nl.normalize().unwrap();
                prop_assert_eq!(once.normalize().unwrap(), once);
            }
        }

        #[test]
        fn g_has_vanishing_slope_at_zero(theta in 0.01f64..0.49, p in 2.0f64..6.0) {
            for nl in [Nonlinearity::bistable_cubic(theta).unwrap(), Nonlinearity::power_field(p).unwrap()] {
                let n = nl.normalize().unwrap();
                prop_assert_eq!(n.g(0.0), 0.0);
                let e = 1e-7;
                let slope = (n.g(e) - n.g(-e)) / (2.0 * e);
                prop_assert!(slope.abs() < 1e-6);
            }
        }

        #[test]
        fn bistable_sign_changes_only_at_roots(theta in 0.01f64..0.49) {
            let nl = Nonlinearity::bistable_cubic(theta).unwrap();
            let top = 1.5;
            let n = 10_000;
            let mut changes = Vec::new();
            let mut prev = nl.f(top / n as f64);
            for k in 2..=n {
                let u = top * k as f64 / n as f64;
                let v = nl.f(u);
                if v == 0.0 || prev * v < 0.0 {
                    changes.push(u);
                }
                if v != 0.0 { prev = v; }
            }
            prop_assert_eq!(changes.len(), 2);
            prop_assert!((changes[0] - theta).abs() <= top / n as f64);
            prop_assert!((changes[1] - 1.0).abs() <= top / n as f64);
        }
    }
}
