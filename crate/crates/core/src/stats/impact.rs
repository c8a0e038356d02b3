//! Four-fifths (disparate impact) screening on rank pairs and score lists.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// The regulatory screening threshold: a group passes when its selection
/// ratio is at least four fifths of the most-selected group's.
pub const FOUR_FIFTHS: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRatioResult {
    pub selection_count_male: usize,
    pub selection_count_female: usize,
    pub impact_ratio_male: f64,
    pub impact_ratio_female: f64,
    pub passes_four_fifths_male: bool,
    pub passes_four_fifths_female: bool,
}

impl ImpactRatioResult {
    pub(crate) fn from_counts(male: usize, female: usize) -> Self {
        let largest = male.max(female);
        let (ratio_male, ratio_female) = if largest == 0 {
            // Nobody selected on either side: no disparity is measurable,
            // so both ratios are 1 by convention.
            (1.0, 1.0)
        } else {
            (male as f64 / largest as f64, female as f64 / largest as f64)
        };
        ImpactRatioResult {
            selection_count_male: male,
            selection_count_female: female,
            impact_ratio_male: ratio_male,
            impact_ratio_female: ratio_female,
            passes_four_fifths_male: ratio_male >= FOUR_FIFTHS,
            passes_four_fifths_female: ratio_female >= FOUR_FIFTHS,
        }
    }
}

/// Selection counts from rank pairs `(rank_male, rank_female)`: a group is
/// "selected" on a resume when its rank is at least as good (numerically at
/// most) as the other's, so exact ties credit both groups.
pub fn impact_ratio_ras(rank_pairs: &[(f64, f64)]) -> Result<ImpactRatioResult, StatsError> {
    if rank_pairs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let male = rank_pairs.iter().filter(|(m, f)| m <= f).count();
    let female = rank_pairs.iter().filter(|(m, f)| m >= f).count();
    Ok(ImpactRatioResult::from_counts(male, female))
}

/// Selection by score cutoff: a resume is selected for a group when that
/// group's score is strictly above the pooled (male + female) mean score.
/// Lists are paired by resume and must be the same length.
pub fn impact_ratio_score_mean_cutoff(
    scores_male: &[f64],
    scores_female: &[f64],
) -> Result<ImpactRatioResult, StatsError> {
    if scores_male.len() != scores_female.len() {
        return Err(StatsError::UnpairedLists {
            left: scores_male.len(),
            right: scores_female.len(),
        });
    }
    if scores_male.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = scores_male.len() as f64;
    let pooled_mean =
        (scores_male.iter().sum::<f64>() + scores_female.iter().sum::<f64>()) / (2.0 * n);
    let male = scores_male.iter().filter(|&&s| s > pooled_mean).count();
    let female = scores_female.iter().filter(|&&s| s > pooled_mean).count();
    Ok(ImpactRatioResult::from_counts(male, female))
}
