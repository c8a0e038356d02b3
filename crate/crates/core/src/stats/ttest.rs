//! Paired t test on within-resume differences.

use super::{degenerate_t, sample_variance, two_sided_t_p, StatsError, TestMethod, TestResult};

/// Two-sided paired t test. Takes the per-resume differences directly (for
/// rank gaps these are already male minus female) and tests mean zero with
/// n - 1 degrees of freedom.
pub fn paired_t_test(differences: &[f64]) -> Result<TestResult, StatsError> {
    if differences.len() < 2 {
        return Err(StatsError::TooFewPairs {
            have: differences.len(),
            need: 2,
        });
    }
    let n = differences.len() as f64;
    let mean = differences.iter().sum::<f64>() / n;
    let variance = sample_variance(differences);
    let (statistic, p_value) = if variance == 0.0 {
        // Zero spread: a nonzero mean is infinitely many standard errors
        // from zero, a zero mean is exactly at the null.
        degenerate_t(mean)
    } else {
        let t = mean / (variance / n).sqrt();
        (t, two_sided_t_p(t, n - 1.0))
    };
    Ok(TestResult::new(
        statistic,
        p_value,
        0,
        TestMethod::PairedT,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_differences_are_null() {
        let r = paired_t_test(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
        assert_eq!(r.method, TestMethod::PairedT);
        assert_eq!(r.n_permutations, 0);
    }

    #[test]
    fn hand_computed_t_and_p() {
        // d = [1, 2, 3]: mean 2, sd 1, t = 2 / (1/sqrt(3)) = 2*sqrt(3), df 2.
        let r = paired_t_test(&[1.0, 2.0, 3.0]).unwrap();
        let expected_t = 2.0 * 3.0f64.sqrt();
        assert!((r.statistic - expected_t).abs() < 1e-12);
        // For df = 2 the two-sided p has closed form 1 - t/sqrt(2 + t^2).
        let expected_p = 1.0 - expected_t / (2.0 + expected_t * expected_t).sqrt();
        assert!((r.p_value - expected_p).abs() < 1e-10, "p = {}", r.p_value);
    }

    #[test]
    fn constant_nonzero_differences_degenerate() {
        let r = paired_t_test(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(r.statistic, f64::MAX);
        assert!(r.p_value > 0.0 && r.p_value < 1e-300);
        assert!(r.significant);
    }

    #[test]
    fn degenerate_result_round_trips_through_json() {
        // Zero-variance differences used to flag the degenerate case with an
        // infinite statistic, which JSON cannot represent: the serialized
        // artifact came back unreadable. The statistic must stay finite.
        let r = paired_t_test(&[3.0, 3.0]).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: TestResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn all_zero_differences_degenerate_to_null() {
        let r = paired_t_test(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn mirror_negates_t_keeps_p() {
        let d = [0.4, -0.2, 0.9, 0.3, 0.1];
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let a = paired_t_test(&d).unwrap();
        let b = paired_t_test(&neg).unwrap();
        assert!((a.statistic + b.statistic).abs() < 1e-12);
        assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn too_few_pairs_rejected() {
        assert!(matches!(
            paired_t_test(&[1.0]),
            Err(StatsError::TooFewPairs { have: 1, need: 2 })
        ));
    }
}
