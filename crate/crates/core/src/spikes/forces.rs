use serde::Serialize;

use super::chain::{norm, scale, sub, SpikeChain, Vec2};
use crate::error::{Error, Result};

/// `F(r) = r^{-(d-1)/2} e^{-r}`.
pub fn interaction_f(d: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("interaction distance {r} must be positive")));
    }
    Ok(f_unchecked(d, r))
}

pub(crate) fn f_unchecked(d: usize, r: f64) -> f64 {
    r.powf(-(d as f64 - 1.0) / 2.0) * (-r).exp()
}

/// `F'(r) = -F(r) (1 + (d-1)/(2r))`.
pub(crate) fn f_derivative(d: usize, r: f64) -> f64 {
    -f_unchecked(d, r) * (1.0 + (d as f64 - 1.0) / (2.0 * r))
}

/// Attraction on a spike at `from` exerted by one at `to`.
pub(crate) fn pull(d: usize, amplitude: f64, from: Vec2, to: Vec2) -> Vec2 {
    let v = sub(to, from);
    let r = norm(v);
    scale(amplitude * f_unchecked(d, r) / r, v)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpikeForce {
    pub k: i64,
    pub eta: Vec2,
    /// Whether the model value is only the nearest-neighbour estimate covered
    /// by the far-field error budget (`|k| ≥ 2`).
    pub within_budget: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForceReport {
    pub eta0: Vec2,
    /// `φ₀(z₀) e_y`.
    pub boundary: Vec2,
    /// Pull of `z₋₁` on `z₀`.
    pub attraction_minus: Vec2,
    /// Pull of `z₁` on `z₀`.
    pub attraction_plus: Vec2,
    /// `L₀^{-2/3} φ₀(z₀)`.
    pub error_budget: f64,
    /// `η_k` for `1 ≤ |k| ≤ K` (nearest-neighbour model).
    pub others: Vec<SpikeForce>,
}

impl ForceReport {
    /// Recomputes `η₀` from its parts in the order used to build it.
    pub fn decomposition_sum(&self) -> Vec2 {
        sum3(self.boundary, self.attraction_minus, self.attraction_plus)
    }

    pub fn eta0_norm(&self) -> f64 {
        norm(self.eta0)
    }

    pub fn max_other(&self) -> f64 {
        self.others.iter().map(|f| norm(f.eta)).fold(0.0, f64::max)
    }
}

fn sum3(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    [(a[0] + b[0]) + c[0], (a[1] + b[1]) + c[1]]
}

/// Leading-order forces with unit prefactors.
pub fn compute_forces(chain: &SpikeChain, phi0_at_z0: f64, amplitude: f64) -> ForceReport {
    let d = chain.d;
    let z0 = chain.z0();
    let boundary = [0.0, phi0_at_z0];
    let attraction_minus = pull(d, amplitude, z0, chain.center(-1));
    let attraction_plus = pull(d, amplitude, z0, chain.center(1));
    let eta0 = sum3(boundary, attraction_minus, attraction_plus);
    let k_max = chain.k_max() as i64;
    let mut others = Vec::new();
    for k in (-k_max..=k_max).filter(|&k| k != 0) {
        let zk = chain.center(k);
        let inner = chain.center(k - k.signum());
        let outer = chain.center(k + k.signum());
        let a = pull(d, amplitude, zk, inner);
        let b = pull(d, amplitude, zk, outer);
        others.push(SpikeForce {
            k,
            eta: [a[0] + b[0], a[1] + b[1]],
            within_budget: k.abs() >= 2,
        });
    }
    ForceReport {
        eta0,
        boundary,
        attraction_minus,
        attraction_plus,
        error_budget: chain.l0.powf(-2.0 / 3.0) * phi0_at_z0,
        others,
    }
}

/// Damped fixed point on the perturbations `p_k`, `1 ≤ |k| ≤ K`, driving the
/// nearest-neighbour forces `η_k` to zero. Returns the iteration count and the
/// final largest `|η_k|`.
///
/// Along a leg the pair attraction pushes a displaced spike further (force
/// `≈ A|F'|(2p_k - p_{k±1})`), while across the leg it pulls it back
/// (`≈ -(A F / L)(2p_k - p_{k±1})`), so the two components are updated with
/// opposite signs.
pub fn relax_perturbations(chain: &mut SpikeChain, amplitude: f64, tol: f64, max_iter: usize) -> (usize, f64) {
    let d = chain.d;
    let k_max = chain.k_max() as i64;
    let omega = 0.5;
    let mut worst = f64::INFINITY;
    for it in 0..=max_iter {
        worst = 0.0;
        let mut updates = Vec::new();
        for k in (-k_max..=k_max).filter(|&k| k != 0) {
            let zk = chain.center(k);
            let a = pull(d, amplitude, zk, chain.center(k - k.signum()));
            let b = pull(d, amplitude, zk, chain.center(k + k.signum()));
            let eta = [a[0] + b[0], a[1] + b[1]];
            worst = worst.max(norm(eta));
            let (l, t) = if k > 0 {
                (chain.l_plus, chain.theta_plus)
            } else {
                (chain.l_minus, chain.theta_minus)
            };
            let along = eta[0] * t[0] + eta[1] * t[1];
            let across = -eta[0] * t[1] + eta[1] * t[0];
            let k_along = 2.0 * amplitude * f_derivative(d, l).abs();
            let k_across = 2.0 * amplitude * f_unchecked(d, l) / l;
            let da = -omega * along / k_along;
            let dc = omega * across / k_across;
            updates.push((k, [da * t[0] - dc * t[1], da * t[1] + dc * t[0]]));
        }
        if worst <= tol || it == max_iter {
            return (it, worst);
        }
        for (k, dp) in updates {
            let slot = if k > 0 {
                &mut chain.p_plus[(k - 1) as usize]
            } else {
                &mut chain.p_minus[(-k - 1) as usize]
            };
            slot[0] += dp[0];
            slot[1] += dp[1];
        }
    }
    (max_iter, worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spikes::chain::leg_direction;

    #[test]
    fn interaction_values() {
        assert!((interaction_f(1, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((interaction_f(3, 2.0).unwrap() - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((interaction_f(3, 2.0).unwrap() - 0.067_667_641_6).abs() < 1e-9);
        assert!(interaction_f(2, 0.0).is_err());
        assert!(interaction_f(2, 3.0).unwrap() < interaction_f(2, 2.0).unwrap());
    }

    #[test]
    fn symmetric_v_has_no_horizontal_force() {
        let c = SpikeChain::symmetric(2, 6.0, 0.1, 12.5, 6);
        let r = compute_forces(&c, 1e-6, 3.4);
        assert_eq!(r.eta0[0], 0.0);
        assert_eq!(r.eta0, r.decomposition_sum());
        // attraction points toward the neighbours, boundary pushes up
        assert!(r.attraction_plus[0] > 0.0 && r.attraction_plus[1] < 0.0);
        assert!(r.attraction_minus[0] < 0.0);
        assert!(r.boundary[1] > 0.0);
    }

    #[test]
    fn uniform_legs_have_balanced_neighbours() {
        let c = SpikeChain::uniform(2, 6.0, leg_direction(-1.0, 0.08), 13.0, leg_direction(1.0, 0.03), 12.0, 5);
        let r = compute_forces(&c, 1e-6, 3.4);
        assert!(r.max_other() < 1e-12 * norm(r.attraction_plus));
    }

    #[test]
    fn mirrored_chain_mirrors_forces() {
        let mut c = SpikeChain::uniform(2, 6.0, leg_direction(-1.0, 0.08), 13.0, leg_direction(1.0, 0.03), 12.0, 3);
        c.p_plus[0] = [1e-3, -2e-3];
        let a = compute_forces(&c, 2e-6, 3.4);
        let b = compute_forces(&c.mirrored(), 2e-6, 3.4);
        assert_eq!(a.eta0[0], -b.eta0[0]);
        assert_eq!(a.eta0[1], b.eta0[1]);
    }

    #[test]
    fn relaxation_removes_perturbation_forces() {
        let mut c = SpikeChain::symmetric(2, 6.0, 0.1, 12.5, 4);
        c.p_plus[1] = [2e-2, 1e-2];
        let before = compute_forces(&c, 1e-6, 3.4).max_other();
        let (_, after) = relax_perturbations(&mut c, 3.4, 1e-3 * before, 500);
        assert!(after <= 1e-3 * before, "{before:e} -> {after:e}");
    }
}
