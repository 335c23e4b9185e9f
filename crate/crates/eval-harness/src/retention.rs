//! Functional-retention arithmetic.

/// How much of the original-skill score survives under the compressed
/// layout: `min(score_c / score_a, 1)`, defaulting to 1 when the original
/// scored zero (there is no baseline to degrade).
pub fn retention(score_a: f64, score_c: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&score_a), "score_a out of range: {score_a}");
    debug_assert!((0.0..=1.0).contains(&score_c), "score_c out of range: {score_c}");
    if score_a <= 0.0 {
        1.0
    } else {
        (score_c / score_a).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_baseline_defaults_to_full_retention() {
        assert_eq!(retention(0.0, 0.0), 1.0);
        assert_eq!(retention(0.0, 1.0), 1.0);
    }

    #[test]
    fn better_than_baseline_clamps_at_one() {
        assert_eq!(retention(0.93, 1.0), 1.0);
    }

    #[test]
    fn regressions_report_the_exact_ratio() {
        assert_eq!(retention(1.0, 0.5), 0.5);
        assert!((retention(0.8, 0.6) - 0.75).abs() < 1e-12);
    }
}
