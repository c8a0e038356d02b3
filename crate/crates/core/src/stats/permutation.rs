//! Paired permutation tests for location and dispersion differences.
//!
//! Observations arrive as `(male, female)` pairs sharing a resume. Under the
//! null that the group label is exchangeable within a pair, swapping the two
//! members of any subset of pairs leaves the joint distribution unchanged, so
//! the reference distribution is built from label swaps only. When the full
//! swap space fits inside the permutation budget it is enumerated exactly;
//! otherwise swaps are sampled with a seeded generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sample_variance, StatsError, TestMethod, TestResult, PERM_EPS};

/// Difference in group means, male minus female.
fn level_statistic(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let diff_sum: f64 = pairs.iter().map(|(m, f)| m - f).sum();
    diff_sum / n
}

/// Difference in sample variances, male minus female.
fn spread_statistic(pairs: &[(f64, f64)]) -> f64 {
    let males: Vec<f64> = pairs.iter().map(|&(m, _)| m).collect();
    let females: Vec<f64> = pairs.iter().map(|&(_, f)| f).collect();
    sample_variance(&males) - sample_variance(&females)
}

/// Two-sided permutation test on the difference in means across paired
/// groups. The reported statistic keeps its sign; the p-value counts swap
/// assignments whose |statistic| reaches the observed |statistic|.
pub fn perm_test_level(
    pairs: &[(f64, f64)],
    n_permutations: u32,
    seed: u64,
) -> Result<TestResult, StatsError> {
    run_permutation(pairs, n_permutations, seed, TestMethod::PermMean, level_statistic)
}

/// Two-sided permutation test on the difference in sample variances across
/// paired groups, sharing the machinery of [`perm_test_level`].
pub fn perm_test_spread(
    pairs: &[(f64, f64)],
    n_permutations: u32,
    seed: u64,
) -> Result<TestResult, StatsError> {
    run_permutation(pairs, n_permutations, seed, TestMethod::PermVar, spread_statistic)
}

fn run_permutation(
    pairs: &[(f64, f64)],
    n_permutations: u32,
    seed: u64,
    method: TestMethod,
    statistic: fn(&[(f64, f64)]) -> f64,
) -> Result<TestResult, StatsError> {
    if pairs.len() < 2 {
        return Err(StatsError::TooFewPairs {
            have: pairs.len(),
            need: 2,
        });
    }
    if n_permutations == 0 {
        return Err(StatsError::ZeroPermutations);
    }

    let observed = statistic(pairs);
    let threshold = observed.abs() - PERM_EPS;
    let n = pairs.len();

    // Exact enumeration when every swap assignment fits in the budget.
    if n < 64 && (1u64 << n) <= u64::from(n_permutations) {
        let total = 1u64 << n;
        let mut swapped = pairs.to_vec();
        let mut hits = 0u64;
        for mask in 0..total {
            for (bit, (slot, original)) in swapped.iter_mut().zip(pairs).enumerate() {
                *slot = if mask >> bit & 1 == 1 {
                    (original.1, original.0)
                } else {
                    *original
                };
            }
            if statistic(&swapped).abs() >= threshold {
                hits += 1;
            }
        }
        let p_value = hits as f64 / total as f64;
        return Ok(TestResult::new(observed, p_value, total, method));
    }

    // Monte Carlo sampling of swap assignments, with the add-one correction
    // that keeps the estimate valid (and never exactly zero).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swapped = pairs.to_vec();
    let mut hits = 0u64;
    for _ in 0..n_permutations {
        for (slot, original) in swapped.iter_mut().zip(pairs) {
            *slot = if rng.gen::<bool>() {
                (original.1, original.0)
            } else {
                *original
            };
        }
        if statistic(&swapped).abs() >= threshold {
            hits += 1;
        }
    }
    let p_value = (1 + hits) as f64 / (1 + u64::from(n_permutations)) as f64;
    Ok(TestResult::new(
        observed,
        p_value,
        u64::from(n_permutations),
        method,
    ))
}
