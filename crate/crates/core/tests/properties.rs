use proptest::prelude::*;

use sclab_core::bundle::{validate_double_index, DoubleScaleIndex};
use sclab_core::linear::{
    build_sc_projection, quotient_distance, verify_projection, Assembled, ScSubspace,
};
use sclab_core::polyfold::PartialQuadrant;
use sclab_core::retract::{build_pi_t, idempotency_residual};
use sclab_core::rng;
use sclab_core::scale::{point_of_regularity, smooth_point, RegularityConfig};
use sclab_core::{GridLineScale, TruncatedScale, WeightSequence};

fn circle(ladder: Vec<usize>) -> TruncatedScale {
    TruncatedScale::new(WeightSequence::sobolev_circle(), ladder, 4).unwrap()
}

fn corner_coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 1e-6..10.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_counts_vanishing_corners(corners in prop::collection::vec(corner_coordinate(), 0..6), w in prop::collection::vec(-5.0..5.0f64, 0..3)) {
        let q = PartialQuadrant::new(corners.len());
        let zeros = corners.iter().filter(|&&a| a == 0.0).count();
        let mut p = corners.clone();
        p.extend(&w);
        prop_assert_eq!(q.degeneracy_index(&p).unwrap(), zeros);
        // positive rescaling of corners preserves the index
        let scaled: Vec<f64> = p.iter().enumerate().map(|(i, v)| if i < corners.len() { 3.5 * v } else { -v }).collect();
        prop_assert_eq!(q.degeneracy_index(&scaled).unwrap(), zeros);
    }

    #[test]
    fn double_indices_form_a_lattice(m in 0usize..50, k in 0usize..60) {
        let valid = validate_double_index(DoubleScaleIndex::new(m, k));
        prop_assert_eq!(valid, k <= m + 1);
        if valid {
            prop_assert!(validate_double_index(DoubleScaleIndex::new(m + 1, k)));
            prop_assert!(validate_double_index(DoubleScaleIndex::new(m + 1, k + 1)));
        }
    }

    #[test]
    fn level_norms_increase_with_level(seed in any::<u64>()) {
        let s = circle(vec![64]);
        let x = smooth_point(&s, 64, 0.2, &mut rng::seeded(seed));
        let norms: Vec<f64> = (0..=4).map(|m| s.level_norm(&x, m).unwrap()).collect();
        prop_assert!(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-14)));
    }

    #[test]
    fn estimator_recovers_planted_regularity(level in 0.5..3.0f64, seed in any::<u64>()) {
        let s = circle(vec![256]);
        let x = point_of_regularity(&s, level, 256, &mut rng::seeded(seed));
        let est = s.estimate_regularity(&x, &RegularityConfig::default()).unwrap();
        prop_assert!((est.level - level).abs() <= 0.1, "planted {} estimated {}", level, est.level);
    }

    #[test]
    fn smooth_projections_split(seed in any::<u64>(), rank in 1usize..=3) {
        let s = circle(vec![128]);
        let mut r = rng::seeded(seed);
        let basis: Vec<Vec<f64>> = (0..rank).map(|_| smooth_point(&s, 128, 0.4, &mut r)).collect();
        let k = ScSubspace::new(s, basis.clone()).unwrap();
        let p = build_sc_projection(&k, &RegularityConfig::default()).unwrap();
        let rep = verify_projection(&p, &k, 128, 5, &mut r).unwrap();
        prop_assert!(rep.idempotency <= 1e-10);
        prop_assert_eq!(rep.rank, rank);
        prop_assert_eq!(rep.splitting_residual, 0.0);
        for b in &basis {
            prop_assert!(quotient_distance(b, &k, 2).unwrap() <= 1e-9 * k.ambient().level_norm(b, 2).unwrap());
        }
    }

    #[test]
    fn splicing_projections_are_idempotent(t in prop_oneof![-2.0..=0.0f64, 0.3..3.0f64]) {
        let g = GridLineScale::hilbert(64.0, 1025, 0.5, 2).unwrap();
        let p = build_pi_t(t, &g).unwrap();
        prop_assert!(p.idempotency_residual() <= 1e-10);
        let a: Assembled = p.assembled();
        prop_assert!(idempotency_residual(&a) <= 1e-10);
    }
}
