use std::f64::consts::PI;

use proptest::prelude::*;
use spikeforge::cli::{parse_pairs, RunConfig};
use spikeforge::domain::{build_grid, BoxSpec, DomainSpec, Field, SideBc, SidePolicy};
use spikeforge::elliptic::thin_set_eigenvalue;
use spikeforge::spikes::{
    compute_forces, interaction_f, leg_direction, max_inclination, solve_balance, BalanceMode, BalanceOptions,
    BalanceOutcome, BalanceProblem, Phi0Model, SpikeChain,
};

const AMPLITUDE_2D: f64 = 3.517_743;

/// Spacing with `2 sin β A F(L) = φ` by bisection on the monotone `F`.
fn symmetric_spacing(phi: f64, beta: f64) -> f64 {
    let target = phi / (2.0 * beta.sin() * AMPLITUDE_2D);
    let (mut lo, mut hi) = (1e-3, 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if interaction_f(2, mid).unwrap() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_balance_matches_bisection(
        aperture in 1.05f64..1.6,
        frac in 0.15f64..0.85,
        log_phi in -16.0f64..-9.0,
    ) {
        let cone = DomainSpec::cone(aperture * PI).unwrap();
        let beta = frac * max_inclination(&cone).unwrap();
        let phi = log_phi.exp();
        let problem = BalanceProblem { d: 2, amplitude: AMPLITUDE_2D, l0: 6.0, phi0: Phi0Model::Fixed(phi) };
        let out = solve_balance(&cone, &problem, &BalanceMode::Symmetric { inclination: beta }, &BalanceOptions::default()).unwrap();
        let BalanceOutcome::Equilibrium(eq) = out else { panic!("cone wider than π") };
        prop_assert!(eq.eta0_norm <= 1e-8);
        let oracle = symmetric_spacing(phi, beta);
        prop_assert!((eq.chain.l_plus - oracle).abs() <= 1e-7 * oracle, "{} vs {}", eq.chain.l_plus, oracle);
        prop_assert!((eq.chain.l_plus - eq.chain.l_minus).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn cones_narrower_than_half_plane_never_balance(aperture in 0.5f64..0.99, log_phi in -16.0f64..-9.0) {
        let cone = DomainSpec::cone(aperture * PI).unwrap();
        let problem = BalanceProblem { d: 2, amplitude: AMPLITUDE_2D, l0: 6.0, phi0: Phi0Model::Fixed(log_phi.exp()) };
        let out = solve_balance(&cone, &problem, &BalanceMode::Symmetric { inclination: 0.1 }, &BalanceOptions::default()).unwrap();
        let BalanceOutcome::NonexistenceCertificate(c) = out else { panic!("equilibrium below aperture π") };
        prop_assert!(c.margin > 0.0);
    }

    #[test]
    fn forces_commute_with_reflection(
        bm in 0.01f64..0.6, bp in 0.01f64..0.6,
        lm in 6.0f64..14.0, lp in 6.0f64..14.0,
        phi in 1e-7f64..1e-4,
    ) {
        let chain = SpikeChain::uniform(2, 6.0, leg_direction(-1.0, bm), lm, leg_direction(1.0, bp), lp, 4);
        let a = compute_forces(&chain, phi, AMPLITUDE_2D);
        let b = compute_forces(&chain.mirrored(), phi, AMPLITUDE_2D);
        let scale = a.boundary[1].abs().max(a.attraction_plus[0].abs()) + 1e-300;
        prop_assert!((a.eta0[0] + b.eta0[0]).abs() <= 1e-12 * scale);
        prop_assert!((a.eta0[1] - b.eta0[1]).abs() <= 1e-12 * scale);
        let sum = a.decomposition_sum();
        prop_assert!((sum[0] - a.eta0[0]).abs() <= 1e-14 * scale && (sum[1] - a.eta0[1]).abs() <= 1e-14 * scale);
    }

    #[test]
    fn interaction_decreases_with_distance(r in 0.1f64..40.0, dr in 1e-3f64..5.0, d in 1usize..4) {
        prop_assert!(interaction_f(d, r + dr).unwrap() < interaction_f(d, r).unwrap());
    }

    #[test]
    fn rendered_config_reparses_to_itself(bumps in 1usize..50, amp in 0.1f64..9.0, seed in any::<u64>()) {
        let over = vec![
            ("eigen.bumps".to_string(), bumps.to_string()),
            ("eigen.max_amp".to_string(), amp.to_string()),
            ("seed".to_string(), seed.to_string()),
        ];
        let cfg = RunConfig::resolve("eigen", &[], &over).unwrap();
        let again = RunConfig::resolve("eigen", &parse_pairs(&cfg.render()).unwrap(), &[]).unwrap();
        prop_assert_eq!(&cfg.values, &again.values);
        prop_assert_eq!(again.seed, seed);
    }

    #[test]
    fn binary_fields_round_trip(h in 0.05f64..0.5, a in -3.0f64..3.0) {
        let grid = build_grid(
            &DomainSpec::half_plane(),
            h,
            BoxSpec::new(-2.0, 2.0, -1.0, 3.0),
            SidePolicy::uniform(SideBc::Zero),
        ).unwrap();
        let f = Field::from_fn(&grid, |x, y| (a * x).sin() + y * y);
        let g = Field::from_binary(&f.to_binary()).unwrap();
        prop_assert_eq!((f.nx, f.ny), (g.nx, g.ny));
        prop_assert!(f.values.iter().zip(&g.values).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn slab_eigenvalue_shrinks_with_the_slab(a in -8.0f64..-0.5, eta in 0.1f64..0.6) {
        let wide = thin_set_eigenvalue(a, eta, 10.0, 0.01).unwrap();
        let thin = thin_set_eigenvalue(a, 0.5 * eta, 10.0, 0.01).unwrap();
        prop_assert!(wide < 0.0 && thin < 0.0);
        prop_assert!(thin.abs() < wide.abs());
    }
}
