//! Familywise error control across a battery of hypothesis tests.

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    Bonferroni,
    Holm,
}

impl CorrectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrectionMethod::Bonferroni => "bonferroni",
            CorrectionMethod::Holm => "holm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityOutcome {
    /// Reject/accept decision for each input p-value, in input order.
    pub decisions: Vec<bool>,
    /// The per-test threshold at which the procedure stopped: for the
    /// single-step method this is alpha / m; for the step-down method it is
    /// the level of the first non-rejected hypothesis (alpha if all reject).
    pub threshold: f64,
    pub method: CorrectionMethod,
    pub alpha: f64,
    pub m: usize,
}

/// Apply a familywise correction at level `alpha` over `m = p_values.len()`
/// simultaneous tests. All comparisons against thresholds are strict.
pub fn correct_multiplicity(
    p_values: &[f64],
    alpha: f64,
    method: CorrectionMethod,
) -> Result<MultiplicityOutcome, StatsError> {
    if p_values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    for &p in p_values {
        if !(p > 0.0 && p <= 1.0) {
            return Err(StatsError::InvalidPValue(p));
        }
    }
    let m = p_values.len();
    match method {
        CorrectionMethod::Bonferroni => {
            let threshold = alpha / m as f64;
            let decisions = p_values.iter().map(|&p| p < threshold).collect();
            Ok(MultiplicityOutcome {
                decisions,
                threshold,
                method,
                alpha,
                m,
            })
        }
        CorrectionMethod::Holm => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
            let mut decisions = vec![false; m];
            let mut threshold = alpha;
            for (k, &idx) in order.iter().enumerate() {
                let level = alpha / (m - k) as f64;
                if p_values[idx] < level {
                    decisions[idx] = true;
                } else {
                    // Step-down stops at the first failure; everything less
                    // extreme is accepted as well.
                    threshold = level;
                    break;
                }
            }
            Ok(MultiplicityOutcome {
                decisions,
                threshold,
                method,
                alpha,
                m,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn battery_of_hundred_passes_strong_p() {
        let mut ps = vec![0.5; 99];
        ps.push(0.0004);
        let out = correct_multiplicity(&ps, 0.05, CorrectionMethod::Bonferroni).unwrap();
        assert_eq!(out.m, 100);
        assert!((out.threshold - 0.0005).abs() < 1e-15);
        assert!(out.decisions[99]);
        assert_eq!(out.decisions.iter().filter(|&&d| d).count(), 1);
    }

    #[test]
    fn boundary_p_is_not_rejected() {
        // Exactly alpha/m fails the strict comparison.
        let out = correct_multiplicity(&[0.0005; 100], 0.05, CorrectionMethod::Bonferroni).unwrap();
        assert!(out.decisions.iter().all(|&d| !d));
    }

    #[test]
    fn single_test_uses_alpha_itself() {
        let out = correct_multiplicity(&[0.04], 0.05, CorrectionMethod::Bonferroni).unwrap();
        assert_eq!(out.threshold, 0.05);
        assert!(out.decisions[0]);
        let out = correct_multiplicity(&[0.04], 0.05, CorrectionMethod::Holm).unwrap();
        assert!(out.decisions[0]);
    }

    #[test]
    fn step_down_rescues_the_second_test() {
        // m = 2: the single-step threshold 0.025 rejects only the first;
        // the step-down ladder tests the second at full alpha.
        let ps = [0.0001, 0.04];
        let bonf = correct_multiplicity(&ps, 0.05, CorrectionMethod::Bonferroni).unwrap();
        assert_eq!(bonf.decisions, vec![true, false]);
        let holm = correct_multiplicity(&ps, 0.05, CorrectionMethod::Holm).unwrap();
        assert_eq!(holm.decisions, vec![true, true]);
        assert_eq!(holm.threshold, 0.05);
    }

    #[test]
    fn step_down_halts_at_first_failure() {
        // Sorted levels for m = 3: alpha/3, alpha/2, alpha. The middle
        // p-value fails its level, so the last is accepted despite being
        // below alpha.
        let ps = [0.001, 0.03, 0.04];
        let holm = correct_multiplicity(&ps, 0.05, CorrectionMethod::Holm).unwrap();
        assert_eq!(holm.decisions, vec![true, false, false]);
        assert_eq!(holm.threshold, 0.025);
    }

    #[test]
    fn decisions_follow_input_order_not_sorted_order() {
        let ps = [0.04, 0.0001];
        let holm = correct_multiplicity(&ps, 0.05, CorrectionMethod::Holm).unwrap();
        assert_eq!(holm.decisions, vec![true, true]);
        let bonf = correct_multiplicity(&ps, 0.05, CorrectionMethod::Bonferroni).unwrap();
        assert_eq!(bonf.decisions, vec![false, true]);
    }

    #[test]
    fn invalid_inputs_error() {
        assert!(matches!(
            correct_multiplicity(&[], 0.05, CorrectionMethod::Holm),
            Err(StatsError::EmptyInput)
        ));
        assert!(matches!(
            correct_multiplicity(&[0.5], 0.0, CorrectionMethod::Holm),
            Err(StatsError::InvalidAlpha(_))
        ));
        assert!(matches!(
            correct_multiplicity(&[0.0], 0.05, CorrectionMethod::Holm),
            Err(StatsError::InvalidPValue(_))
        ));
        assert!(matches!(
            correct_multiplicity(&[1.5], 0.05, CorrectionMethod::Bonferroni),
            Err(StatsError::InvalidPValue(_))
        ));
    }

    proptest! {
        /// The step-down method is uniformly at least as powerful as the
        /// single-step method: everything the latter rejects, it rejects.
        #[test]
        fn holm_dominates_bonferroni(
            ps in proptest::collection::vec(1e-6f64..1.0, 1..20),
            alpha in 0.01f64..0.2,
        ) {
            let bonf = correct_multiplicity(&ps, alpha, CorrectionMethod::Bonferroni).unwrap();
            let holm = correct_multiplicity(&ps, alpha, CorrectionMethod::Holm).unwrap();
            for (b, h) in bonf.decisions.iter().zip(&holm.decisions) {
                prop_assert!(!b || *h);
            }
        }
    }
}
