mod common;

use comir_diag::embedding::{
    classical_mds, mds_fit, sammon_stress, DissimilarityMatrix, DissimilarityMetric, MdsConfig,
};
use comir_diag::matrix::Matrix;
use common::*;
use proptest::prelude::*;

#[test]
fn planar_configurations_are_recovered_from_random_starts() {
    for seed in 0..5 {
        let (stress, iters, monotone) = planar_mds(seed);
        assert!(
            stress < 1e-6,
            "seed {seed}: stress {stress:e} after {iters} iterations"
        );
        assert!(iters <= 2000);
        assert!(monotone, "seed {seed}: stress history increased");
    }
}

#[test]
fn classical_start_is_exact_on_planar_data() {
    let items = gaussian(15, 2, &mut rng(4));
    let delta = DissimilarityMatrix::from_rows(&items, DissimilarityMetric::Euclidean).unwrap();
    let init = classical_mds(&delta);
    assert!(sammon_stress(&delta, &init).unwrap() < 1e-20);
    let sol = mds_fit(&delta, &MdsConfig::default()).unwrap();
    assert!(sol.final_stress < 1e-12);
}

#[test]
fn rank_k_data_has_d_minus_k_vanishing_values() {
    for k in [1, 4, 16] {
        let (tiny, erank, collapsed) = collapse_probe(2000, 32, k, k as u64);
        assert_eq!(tiny, 32 - k, "k = {k}");
        assert_eq!(collapsed, 32 - k);
        assert!(erank <= k as f64 + 1e-9, "k = {k}: effective rank {erank}");
    }
}

#[test]
fn effective_rank_of_isotropic_data_approaches_k() {
    for k in [1, 4, 16] {
        let (_, erank, _) = collapse_probe(20000, 32, k, 40 + k as u64);
        assert!(
            (erank - k as f64).abs() < 0.5,
            "k = {k}: effective rank {erank}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stress_is_invariant_to_rigid_motion_of_the_configuration(seed in 0u64..1000, theta in -3.0f64..3.0, tx in -5.0f64..5.0) {
        let mut r = rng(seed);
        let items = gaussian(10, 3, &mut r);
        let delta = DissimilarityMatrix::from_rows(&items, DissimilarityMetric::Euclidean).unwrap();
        let pts = gaussian(10, 2, &mut r);
        let (c, s) = (theta.cos(), theta.sin());
        let moved = Matrix::from_fn(10, 2, |i, j| {
            let (x, y) = (pts[(i, 0)], pts[(i, 1)]);
            if j == 0 { c * x - s * y + tx } else { s * x + c * y }
        });
        let a = sammon_stress(&delta, &pts).unwrap();
        let b = sammon_stress(&delta, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}
