//! Inferential machinery over rank and score gaps: impact ratios, paired
//! permutation tests for level (mean) and spread (variance) differences, the
//! paired t-test, multiple-testing corrections, the within-estimator
//! fixed-effects fit with cluster-robust standard errors, the industry-dummy
//! regression, and moving-average gap series.
//!
//! Every function here is pure and deterministic given its seed arguments;
//! all randomness flows through explicitly seeded generators.

mod fixed_effects;
mod impact;
mod industry;
mod moving_average;
mod multiplicity;
mod permutation;
mod ttest;

pub use fixed_effects::{fit_fixed_effects, FixedEffectsFit, PanelRow};
pub use impact::{impact_ratio_ras, impact_ratio_score_mean_cutoff, ImpactRatioResult, FOUR_FIFTHS};
pub use industry::{fit_industry, IndustryFit};
pub use moving_average::{moving_average_gap, MovingAveragePoint, MovingAverageSeries};
pub use multiplicity::{correct_multiplicity, CorrectionMethod, MultiplicityOutcome};
pub use permutation::{perm_test_level, perm_test_spread};
pub use ttest::paired_t_test;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

/// Default per-test significance level: a 0.05 family level Bonferroni-split
/// across 100 tests.
pub const SIGNIFICANCE_LEVEL: f64 = 0.0005;

/// Absolute tolerance used when comparing permuted statistics against the
/// observed one, so ties under floating-point noise count as exceedances.
pub(crate) const PERM_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} pairs, got {have}")]
    TooFewPairs { have: usize, need: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("permutation count must be positive")]
    ZeroPermutations,
    #[error("score lists must be the same length: {left} vs {right}")]
    UnpairedLists { left: usize, right: usize },
    #[error("p-value {0} outside (0, 1]")]
    InvalidPValue(f64),
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("retained word count must be >= 1 (resume `{resume_id}`)")]
    InvalidWordCount { resume_id: String },
    #[error("every resume has fewer than 2 observations; nothing to fit")]
    AllSingleObservation,
    #[error("log word count has no within-resume variation; collinear with the fixed effects")]
    ZeroWithinVariance,
    #[error("industry {0} has no observations")]
    MissingIndustry(String),
    #[error("industry regression does not cover `{0}`; filter it out first")]
    UnsupportedIndustry(String),
    #[error("need at least {need} observations, got {have}")]
    TooFewObservations { have: usize, need: usize },
    #[error("window must be positive")]
    ZeroWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    PermMean,
    PermVar,
    PairedT,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::PermMean => "perm_mean",
            TestMethod::PermVar => "perm_var",
            TestMethod::PairedT => "paired_t",
        }
    }
}

/// Outcome of one hypothesis test. The statistic keeps its sign (positive
/// level statistic means the first group's mean rank is higher, i.e. worse);
/// p-values are two-sided, computed on the absolute statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// 2^n for exact enumeration, B for Monte Carlo, 0 for analytic tests.
    pub n_permutations: u64,
    pub method: TestMethod,
    /// p_value < the default per-test level (0.0005).
    pub significant: bool,
}

impl TestResult {
    pub(crate) fn new(
        statistic: f64,
        p_value: f64,
        n_permutations: u64,
        method: TestMethod,
    ) -> Self {
        TestResult {
            statistic,
            p_value,
            n_permutations,
            method,
            significant: p_value < SIGNIFICANCE_LEVEL,
        }
    }

    /// Re-evaluates the significance flag at a caller-chosen per-test level
    /// (alpha / m for a configured family).
    pub fn at_level(mut self, level: f64) -> Self {
        self.significant = self.p_value < level;
        self
    }
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom, clamped
/// into (0, 1].
pub(crate) fn two_sided_t_p(t: f64, df: f64) -> f64 {
    assert!(df >= 1.0, "t distribution needs df >= 1, got {df}");
    if t.is_infinite() {
        return f64::MIN_POSITIVE;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t parameters");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Statistic and p-value when a standard error degenerates to zero: an
/// exactly-zero coefficient is perfectly null (p = 1), anything else is
/// unboundedly far from it (p at the floating-point floor). The statistic is
/// capped at the largest finite value because the persisted artifacts are
/// JSON, which cannot represent infinity.
pub(crate) fn degenerate_t(coef: f64) -> (f64, f64) {
    if coef == 0.0 {
        (0.0, 1.0)
    } else {
        (coef.signum() * f64::MAX, f64::MIN_POSITIVE)
    }
}

/// Unbiased (n-1) sample variance.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 2, "variance needs at least 2 values");
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_p_matches_known_values() {
        // t = 0 is the exact null center.
        assert!((two_sided_t_p(0.0, 10.0) - 1.0).abs() < 1e-12);
        // Large |t| drives p toward zero, symmetric in sign.
        assert!(two_sided_t_p(50.0, 10.0) < 1e-9);
        assert_eq!(two_sided_t_p(3.0, 7.0), two_sided_t_p(-3.0, 7.0));
        // df=1 is a Cauchy: P(|T| >= 1) = 0.5 exactly.
        assert!((two_sided_t_p(1.0, 1.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_t_convention() {
        assert_eq!(degenerate_t(0.0), (0.0, 1.0));
        let (stat, p) = degenerate_t(0.3);
        assert_eq!(stat, f64::MAX);
        assert_eq!(p, f64::MIN_POSITIVE);
        let (stat, _) = degenerate_t(-0.3);
        assert_eq!(stat, -f64::MAX);
    }

    #[test]
    fn sample_variance_hand_case() {
        // Values [1, 2, 3, 4]: mean 2.5, squared deviations 2.25+0.25+0.25+2.25,
        // variance 5/3.
        assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(sample_variance(&[2.0, 2.0]), 0.0);
    }

    #[test]
    fn at_level_reevaluates() {
        let r = TestResult::new(1.0, 0.003, 100, TestMethod::PairedT);
        assert!(!r.significant);
        assert!(r.clone().at_level(0.01).significant);
        assert!(!r.at_level(0.003).significant, "strict comparison");
    }
}
