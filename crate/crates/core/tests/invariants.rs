//! Structural properties of the sign transform and the sign-based statistics.

use hdwn_core::kernel::trace_omega2_hat;
use hdwn_core::sign::{sign_transform, spatial_sign};
use hdwn_core::stats_tests::{ss_statistic, ss_test};
use hdwn_core::{LagWindow, SeriesMatrix};
use proptest::prelude::*;

/// `I − 2 v vᵀ / ‖v‖²` applied to `x`.
fn householder(v: &[f64], x: &[f64]) -> Vec<f64> {
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let vx: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
    x.iter().zip(v).map(|(xi, vi)| xi - 2.0 * vx / vv * vi).collect()
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    if a.signum() != b.signum() {
        return if a == b { 0 } else { u64::MAX };
    }
    a.to_bits().abs_diff(b.to_bits())
}

fn vector(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, p)
}

fn nonzero_vector(p: usize) -> impl Strategy<Value = Vec<f64>> {
    vector(p).prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-6)
}

fn series(max_n: usize, max_p: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (5usize..=max_n, 2usize..=max_p)
        .prop_flat_map(|(n, p)| prop::collection::vec(nonzero_vector(p), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sign_is_idempotent_to_one_ulp(x in (1usize..20).prop_flat_map(vector)) {
        // A rounded unit vector has norm 1 ± O(ulp).
        let u = spatial_sign(&x).unwrap();
        for (a, b) in spatial_sign(&u).unwrap().iter().zip(&u) {
            prop_assert!(ulp_distance(*a, *b) <= 1, "{a} vs {b}");
        }
    }

    #[test]
    fn sign_has_unit_norm(x in (1usize..20).prop_flat_map(nonzero_vector)) {
        let u = spatial_sign(&x).unwrap();
        let norm: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_commutes_with_reflections(
        (x, v) in (2usize..20).prop_flat_map(|p| (vector(p), nonzero_vector(p)))
    ) {
        let lhs = spatial_sign(&householder(&v, &x)).unwrap();
        let rhs = householder(&v, &spatial_sign(&x).unwrap());
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn statistic_is_rotation_invariant(
        (rows, v1, v2) in series(14, 8).prop_flat_map(|rows| {
            let p = rows[0].len();
            (Just(rows), nonzero_vector(p), nonzero_vector(p))
        }),
        lags in 1usize..=3,
    ) {
        let eps = SeriesMatrix::from_rows(&rows).unwrap();
        let rotated: Vec<Vec<f64>> =
            rows.iter().map(|r| householder(&v2, &householder(&v1, r))).collect();
        let rot = SeriesMatrix::from_rows(&rotated).unwrap();
        let a = ss_statistic(&sign_transform(&eps).unwrap(), lags).unwrap();
        let b = ss_statistic(&sign_transform(&rot).unwrap(), lags).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn test_output_is_bitwise_scale_invariant_for_power_of_two_scales(
        (rows, exps) in series(14, 8).prop_flat_map(|rows| {
            let n = rows.len();
            (Just(rows), prop::collection::vec(-30i32..30, n))
        }),
    ) {
        let eps = SeriesMatrix::from_rows(&rows).unwrap();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .zip(&exps)
            .map(|(r, &e)| r.iter().map(|v| v * 2f64.powi(e)).collect())
            .collect();
        let scaled = SeriesMatrix::from_rows(&scaled).unwrap();
        let lags = LagWindow::new(1).unwrap();
        prop_assert_eq!(ss_test(&eps, lags, 0.05).unwrap(), ss_test(&scaled, lags, 0.05).unwrap());
    }

    #[test]
    fn test_output_is_bitwise_scale_invariant_for_integer_data(
        (rows, scales) in (5usize..=14, 2usize..=8).prop_flat_map(|(n, p)| (
            prop::collection::vec(prop::collection::vec(-1000i32..1000, p), n),
            prop::collection::vec(1i32..100_000, n),
        )),
    ) {
        prop_assume!(rows.iter().all(|r| r.iter().any(|&v| v != 0)));
        let eps: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .zip(&scales)
            .map(|(r, &c)| r.iter().map(|&v| (v as i64 * c as i64) as f64).collect())
            .collect();
        let a = SeriesMatrix::from_rows(&eps).unwrap();
        let b = SeriesMatrix::from_rows(&scaled).unwrap();
        for h in 1..=3 {
            let lags = LagWindow::new(h).unwrap();
            prop_assert_eq!(ss_test(&a, lags, 0.05).unwrap(), ss_test(&b, lags, 0.05).unwrap());
        }
    }

    #[test]
    fn lag_one_statistic_is_time_reversible(rows in series(14, 8)) {
        let eps = SeriesMatrix::from_rows(&rows).unwrap();
        let reversed: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let rev = SeriesMatrix::from_rows(&reversed).unwrap();
        let a = ss_statistic(&sign_transform(&eps).unwrap(), 1).unwrap();
        let b = ss_statistic(&sign_transform(&rev).unwrap(), 1).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn omega_estimate_lies_in_unit_interval(
        rows in (2usize..=14, 1usize..=8).prop_flat_map(|(n, p)| prop::collection::vec(vector(p), n)),
    ) {
        let eps = SeriesMatrix::from_rows(&rows).unwrap();
        let t = trace_omega2_hat(&sign_transform(&eps).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn p_values_are_probabilities(rows in series(14, 8), lags in 1usize..=3) {
        let eps = SeriesMatrix::from_rows(&rows).unwrap();
        let o = ss_test(&eps, LagWindow::new(lags).unwrap(), 0.05).unwrap();
        prop_assert!((0.0..=1.0).contains(&o.p_value));
        prop_assert_eq!(o.reject, o.p_value < 0.05);
    }
}
