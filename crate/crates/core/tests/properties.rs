//! Property tests for the structural invariants: monotone cdfs, decreasing
//! inverse hazards, bracket-preserving roots, share dominance, and the
//! coefficient reflection symmetry.

use collab_auction::numerics::{find_root, grid_argmax_oracle, maximize_bounded, RootConfig};
use collab_auction::sharing::{alpha_sp, alpha_wp};
use collab_auction::surplus::nested_coefficients;
use collab_auction::{phi, phi_inverse, CollaborationMode, Family, TypeDistribution};
use proptest::prelude::*;

fn arb_distribution() -> impl Strategy<Value = TypeDistribution> {
    prop_oneof![
        Just(TypeDistribution::uniform_01()),
        (0.5f64..3.0).prop_map(|rate| {
            TypeDistribution::new(Family::TruncatedExponential { rate }, 0.0, 1.0).unwrap()
        }),
        (0.2f64..0.8, 0.15f64..0.6).prop_map(|(mu, sigma)| {
            TypeDistribution::new(Family::TruncatedNormal { mu, sigma }, 0.0, 1.0).unwrap()
        }),
        (1.0f64..4.0).prop_map(|k| {
            TypeDistribution::new(Family::Power { k }, 0.0, 1.0).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_monotone_and_bounded(dist in arb_distribution(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let fa = dist.cdf(lo).unwrap();
        let fb = dist.cdf(hi).unwrap();
        prop_assert!(fa <= fb + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fa));
    }

    #[test]
    fn inverse_hazard_non_increasing(dist in arb_distribution(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ra = dist.inverse_hazard(lo).unwrap();
        let rb = dist.inverse_hazard(hi).unwrap();
        prop_assert!(rb <= ra + 1e-9, "rho({lo})={ra} < rho({hi})={rb}");
    }

    #[test]
    fn find_root_stays_in_bracket(c in 0.05f64..0.95) {
        let root = find_root(|x| (x - c) * (1.0 + x), 0.0, 1.0, &RootConfig::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&root));
        prop_assert!((root - c).abs() < 1e-10);
    }

    #[test]
    fn maximize_value_dominates_grid_oracle(a in 0.5f64..6.0, b in -2.0f64..2.0) {
        let h = move |x: f64| -(a * (x - 0.4) * (x - 0.4)) + b * (3.0 * x).sin();
        let (_, v) = maximize_bounded(h, 0.0, 1.0, 257);
        let xo = grid_argmax_oracle(h, 0.0, 1.0, 257);
        prop_assert!(v >= h(xo) - 1e-12);
    }

    #[test]
    fn share_dominance_everywhere(dist in arb_distribution(), t in 0.02f64..1.0) {
        prop_assume!(dist.contains(t));
        let wp = alpha_wp(&dist, t).unwrap().alpha;
        let sp = alpha_sp(&dist, t).unwrap().alpha;
        prop_assert!(sp >= wp - 1e-9, "sp={sp} < wp={wp} at theta={t}");
        prop_assert!((0.0..=1.0).contains(&wp));
        prop_assert!(sp >= 0.5);
    }

    #[test]
    fn coefficient_reflection(alpha in 0.0f64..1.0, zeta in 0.0f64..1.0) {
        let lhs = nested_coefficients(alpha, zeta).0;
        let rhs = nested_coefficients(1.0 - alpha, 1.0 - zeta).0;
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn phi_nonnegative_and_invertible(dist in arb_distribution(), t in 0.05f64..1.0) {
        prop_assume!(dist.contains(t));
        for mode in [CollaborationMode::WinnerPivotal, CollaborationMode::SellerPivotal] {
            let p = phi(mode, &dist, t).unwrap();
            prop_assert!(p >= -1e-12);
            let back = phi_inverse(mode, &dist, p).unwrap();
            prop_assert!((back - t).abs() < 1e-7, "{mode:?}: {t} -> {p} -> {back}");
        }
    }
}
