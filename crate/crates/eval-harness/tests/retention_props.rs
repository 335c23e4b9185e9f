//! Property and spot checks for the retention metric.

use eval_harness::retention;
use proptest::prelude::*;

#[test]
fn zero_baseline_defaults_to_full_retention() {
    assert_eq!(retention(0.0, 0.0), 1.0);
    assert_eq!(retention(0.0, 0.75), 1.0);
    assert_eq!(retention(0.0, 1.0), 1.0);
}

#[test]
fn compressed_run_beating_its_baseline_clamps_to_one() {
    assert_eq!(retention(0.93, 1.0), 1.0);
    assert_eq!(retention(0.5, 0.5), 1.0);
    assert_eq!(retention(0.25, 0.9), 1.0);
}

#[test]
fn regressions_are_the_exact_score_ratio() {
    assert_eq!(retention(1.0, 0.5), 0.5);
    assert!((retention(0.8, 0.6) - 0.75).abs() < 1e-12);
    assert_eq!(retention(1.0, 0.0), 0.0);
}

proptest! {
    #[test]
    fn retention_stays_in_the_unit_interval(a in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let r = retention(a, c);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn matching_or_beating_the_baseline_is_full_retention(a in 0.0f64..=1.0, slack in 0.0f64..=1.0) {
        let c = (a + slack * (1.0 - a)).min(1.0);
        prop_assert_eq!(retention(a, c), 1.0);
    }

    #[test]
    fn retention_is_monotone_in_the_compressed_score(
        a in 0.01f64..=1.0,
        c1 in 0.0f64..=1.0,
        c2 in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(retention(a, lo) <= retention(a, hi));
    }

    #[test]
    fn below_baseline_retention_is_the_ratio(a in 0.01f64..=1.0, frac in 0.0f64..=1.0) {
        let c = a * frac;
        let r = retention(a, c);
        prop_assert!((r - c / a).abs() < 1e-12);
    }
}
