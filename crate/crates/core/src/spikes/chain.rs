use serde::Serialize;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

pub(crate) fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

pub(crate) fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Unit vector of the right (`side = 1`) or left (`side = -1`) leg inclined
/// `inclination` radians below the horizontal.
pub fn leg_direction(side: f64, inclination: f64) -> Vec2 {
    [side * inclination.cos(), -inclination.sin()]
}

/// Angle below the horizontal of a direction (negative if it points upward).
pub fn inclination_of(theta: Vec2) -> f64 {
    (-theta[1]).atan2(theta[0].abs())
}

/// Largest inclination allowed for chain directions: half the angle between
/// the horizontal and the boundary rays of the widest cone `{y > -α|x|}` in Ω.
pub fn max_inclination(spec: &DomainSpec) -> Option<f64> {
    spec.flags().alpha.map(|a| 0.5 * a.atan())
}

/// Bounds on the perturbations: `|p_k| ≤ c_p e^{-σ_p L₀ |k|}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbationBound {
    pub c_p: f64,
    pub sigma_p: f64,
}

impl Default for PerturbationBound {
    fn default() -> Self {
        PerturbationBound { c_p: 1.0, sigma_p: 0.1 }
    }
}

/// Centre `z₀ = (0, L₀)` and two legs of spikes.
#[derive(Clone, Debug, Serialize)]
pub struct SpikeChain {
    pub d: usize,
    pub l0: f64,
    pub theta_minus: Vec2,
    pub theta_plus: Vec2,
    pub l_minus: f64,
    pub l_plus: f64,
    pub s_minus: Vec2,
    pub s_plus: Vec2,
    /// `p_{-k}` at index `k - 1`.
    pub p_minus: Vec<Vec2>,
    /// `p_k` at index `k - 1`.
    pub p_plus: Vec<Vec2>,
}

impl SpikeChain {
    /// Chain with zero shifts and perturbations.
    pub fn uniform(d: usize, l0: f64, theta_minus: Vec2, l_minus: f64, theta_plus: Vec2, l_plus: f64, k_max: usize) -> Self {
        SpikeChain {
            d,
            l0,
            theta_minus,
            theta_plus,
            l_minus,
            l_plus,
            s_minus: [0.0; 2],
            s_plus: [0.0; 2],
            p_minus: vec![[0.0; 2]; k_max],
            p_plus: vec![[0.0; 2]; k_max],
        }
    }

    /// Symmetric V: mirrored legs of equal spacing.
    pub fn symmetric(d: usize, l0: f64, inclination: f64, l: f64, k_max: usize) -> Self {
        Self::uniform(
            d,
            l0,
            leg_direction(-1.0, inclination),
            l,
            leg_direction(1.0, inclination),
            l,
            k_max,
        )
    }

    pub fn k_max(&self) -> usize {
        self.p_plus.len()
    }

    pub fn z0(&self) -> Vec2 {
        [0.0, self.l0]
    }

    /// `z_k` for `-K ≤ k ≤ K`; beyond `K` the legs continue without perturbation.
    pub fn center(&self, k: i64) -> Vec2 {
        if k == 0 {
            return self.z0();
        }
        let m = k.unsigned_abs() as usize;
        let (s, theta, l, p) = if k > 0 {
            (self.s_plus, self.theta_plus, self.l_plus, self.p_plus.get(m - 1))
        } else {
            (self.s_minus, self.theta_minus, self.l_minus, self.p_minus.get(m - 1))
        };
        let base = add(add(self.z0(), s), scale(m as f64 * l, theta));
        add(base, p.copied().unwrap_or([0.0; 2]))
    }

    /// All centres `(k, z_k)` with `|k| ≤ K`.
    pub fn centers(&self) -> Vec<(i64, Vec2)> {
        let k = self.k_max() as i64;
        (-k..=k).map(|i| (i, self.center(i))).collect()
    }

    /// The chain reflected across the vertical axis.
    pub fn mirrored(&self) -> SpikeChain {
        let m = |v: Vec2| [-v[0], v[1]];
        SpikeChain {
            d: self.d,
            l0: self.l0,
            theta_minus: m(self.theta_plus),
            theta_plus: m(self.theta_minus),
            l_minus: self.l_plus,
            l_plus: self.l_minus,
            s_minus: m(self.s_plus),
            s_plus: m(self.s_minus),
            p_minus: self.p_plus.iter().copied().map(m).collect(),
            p_plus: self.p_minus.iter().copied().map(m).collect(),
        }
    }

    /// Checks the construction invariants against a domain.
    pub fn validate(&self, spec: &DomainSpec, bound: &PerturbationBound) -> Result<()> {
        if !(self.l0 > 0.0 && self.l_minus > 0.0 && self.l_plus > 0.0) {
            return Err(Error::Geometry("lengths must be positive".into()));
        }
        for t in [self.theta_minus, self.theta_plus] {
            if (norm(t) - 1.0).abs() > 1e-12 {
                return Err(Error::Geometry("directions must be unit vectors".into()));
            }
        }
        for (k, p) in self.p_plus.iter().chain(&self.p_minus).enumerate() {
            let kk = (k % self.k_max().max(1)) + 1;
            let cap = bound.c_p * (-bound.sigma_p * self.l0 * kk as f64).exp();
            if norm(*p) > cap {
                return Err(Error::Geometry(format!("perturbation |p_{kk}| = {:.3e} exceeds {cap:.3e}", norm(*p))));
            }
        }
        if let Some(beta_max) = max_inclination(spec) {
            for t in [self.theta_minus, self.theta_plus] {
                let b = inclination_of(t);
                if !(b > 0.0 && b < beta_max) {
                    return Err(Error::Geometry(format!(
                        "direction inclined {b:.4} rad, admissible range is (0, {beta_max:.4})"
                    )));
                }
            }
            if self.theta_minus[0] >= 0.0 || self.theta_plus[0] <= 0.0 {
                return Err(Error::Geometry("legs must point to opposite sides".into()));
            }
        }
        for (k, z) in self.centers() {
            let dist = spec.signed_distance(z[0], z[1]);
            if dist < 0.5 * self.l0 {
                return Err(Error::Geometry(format!(
                    "spike {k} at ({:.3}, {:.3}) is {dist:.3} from the boundary",
                    z[0], z[1]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn symmetric_chain_is_mirror_invariant() {
        let c = SpikeChain::symmetric(2, 6.0, 0.05, 13.0, 4);
        let m = c.mirrored();
        for k in -4..=4 {
            let a = c.center(k);
            let b = m.center(-k);
            assert!((a[0] + b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn admissible_directions() {
        let cone = DomainSpec::cone(1.2 * PI).unwrap();
        let beta_max = max_inclination(&cone).unwrap();
        assert!((beta_max - 0.05 * PI).abs() < 1e-12);
        let ok = SpikeChain::symmetric(2, 6.0, 0.5 * beta_max, 13.0, 6);
        ok.validate(&cone, &PerturbationBound::default()).unwrap();
        let steep = SpikeChain::symmetric(2, 6.0, 1.1 * beta_max, 13.0, 6);
        assert!(steep.validate(&cone, &PerturbationBound::default()).is_err());
        let mut big_p = ok.clone();
        big_p.p_plus[0] = [1.0, 0.0];
        assert!(big_p.validate(&cone, &PerturbationBound::default()).is_err());
    }
}
