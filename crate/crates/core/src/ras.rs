//! Rank-After-Scoring: each resume's treatment scores become descending
//! fractional ranks, the male-female rank gap is taken, and the gap is
//! classified into a bias-case label.
//!
//! Ranking is always within one (resume, proportion) cell, never across
//! resumes. With three variants the ranks live in {1, 1.5, 2, 2.5, 3} and
//! always sum to 6; the gap rank_male - rank_female lands in
//! {-2, -1.5, -1, 0, 1, 1.5, 2} (the +-0.5 values are unreachable with three
//! items, which the exhaustive tests confirm, but classification still
//! handles them defensively).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Descending fractional ranks: the highest score gets rank 1 and tied
/// scores share the average of the positions they would occupy. The rank
/// list always sums to n(n+1)/2.
pub fn fractional_rank_desc(scores: &[f64]) -> Vec<f64> {
    assert!(!scores.is_empty(), "ranking an empty score list");
    scores
        .iter()
        .map(|&s| {
            let better = scores.iter().filter(|&&o| o > s).count();
            let tied = scores.iter().filter(|&&o| o == s).count();
            better as f64 + (tied as f64 + 1.0) / 2.0
        })
        .collect()
}

/// Preference-strength label for one resume. The F suffix means the female
/// variant ranked better (positive gap), M the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BiasCase {
    MostBiasedF,
    ClearlyBiasedF,
    MildlyBiasedF,
    Tie,
    MildlyBiasedM,
    ClearlyBiasedM,
    MostBiasedM,
}

impl BiasCase {
    pub const ALL: [BiasCase; 7] = [
        BiasCase::MostBiasedF,
        BiasCase::ClearlyBiasedF,
        BiasCase::MildlyBiasedF,
        BiasCase::Tie,
        BiasCase::MildlyBiasedM,
        BiasCase::ClearlyBiasedM,
        BiasCase::MostBiasedM,
    ];

    /// Classification by |gap|: 2 most, 1.5 clearly, 1 mildly, 0 tie. The
    /// unreachable 0.5 is folded into mildly rather than dropped.
    pub fn from_gap(rank_gap: f64) -> BiasCase {
        let half_steps = (rank_gap * 2.0).round() as i64;
        match half_steps {
            4 => BiasCase::MostBiasedF,
            3 => BiasCase::ClearlyBiasedF,
            1 | 2 => BiasCase::MildlyBiasedF,
            0 => BiasCase::Tie,
            -1 | -2 => BiasCase::MildlyBiasedM,
            -3 => BiasCase::ClearlyBiasedM,
            -4 => BiasCase::MostBiasedM,
            other => panic!("rank gap {rank_gap} ({other} half-steps) outside [-2, 2]"),
        }
    }

    pub fn mirror(self) -> BiasCase {
        match self {
            BiasCase::MostBiasedF => BiasCase::MostBiasedM,
            BiasCase::ClearlyBiasedF => BiasCase::ClearlyBiasedM,
            BiasCase::MildlyBiasedF => BiasCase::MildlyBiasedM,
            BiasCase::Tie => BiasCase::Tie,
            BiasCase::MildlyBiasedM => BiasCase::MildlyBiasedF,
            BiasCase::ClearlyBiasedM => BiasCase::ClearlyBiasedF,
            BiasCase::MostBiasedM => BiasCase::MostBiasedF,
        }
    }

    /// True for the F-suffixed labels.
    pub fn female_preferred(self) -> bool {
        matches!(
            self,
            BiasCase::MostBiasedF | BiasCase::ClearlyBiasedF | BiasCase::MildlyBiasedF
        )
    }

    /// True for the M-suffixed labels.
    pub fn male_preferred(self) -> bool {
        matches!(
            self,
            BiasCase::MostBiasedM | BiasCase::ClearlyBiasedM | BiasCase::MildlyBiasedM
        )
    }

    /// Stable machine-readable label for tables.
    pub fn as_str(self) -> &'static str {
        match self {
            BiasCase::MostBiasedF => "most_biased_f",
            BiasCase::ClearlyBiasedF => "clearly_biased_f",
            BiasCase::MildlyBiasedF => "mildly_biased_f",
            BiasCase::Tie => "tie",
            BiasCase::MildlyBiasedM => "mildly_biased_m",
            BiasCase::ClearlyBiasedM => "clearly_biased_m",
            BiasCase::MostBiasedM => "most_biased_m",
        }
    }
}

impl fmt::Display for BiasCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            BiasCase::MostBiasedF => "Most Biased (F)",
            BiasCase::ClearlyBiasedF => "Clearly Biased (F)",
            BiasCase::MildlyBiasedF => "Mildly Biased (F)",
            BiasCase::Tie => "Tie",
            BiasCase::MildlyBiasedM => "Mildly Biased (M)",
            BiasCase::ClearlyBiasedM => "Clearly Biased (M)",
            BiasCase::MostBiasedM => "Most Biased (M)",
        };
        f.write_str(label)
    }
}

/// Ranks of the three gender arms of one resume at one proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTriple {
    pub resume_id: String,
    pub proportion: f64,
    pub rank_female: f64,
    pub rank_male: f64,
    pub rank_neutral: f64,
    /// rank_male - rank_female; positive means the female variant ranked
    /// better.
    pub rank_gap: f64,
    pub bias_case: BiasCase,
}

/// Ranks a (female, male, neutral) score cell. Panics if a score exceeds 10;
/// missing scores are the caller's exclusion case, not this function's.
pub fn make_rank_triple(
    score_f: u8,
    score_m: u8,
    score_n: u8,
    resume_id: &str,
    proportion: f64,
) -> RankTriple {
    for score in [score_f, score_m, score_n] {
        assert!(score <= 10, "score {score} outside 0-10");
    }
    let ranks = fractional_rank_desc(&[score_f as f64, score_m as f64, score_n as f64]);
    let rank_gap = ranks[1] - ranks[0];
    RankTriple {
        resume_id: resume_id.to_string(),
        proportion,
        rank_female: ranks[0],
        rank_male: ranks[1],
        rank_neutral: ranks[2],
        rank_gap,
        bias_case: BiasCase::from_gap(rank_gap),
    }
}

/// Ranks for a two-arm attribute design (e.g. Close vs Not Close). The gap is
/// rank of the second configured value minus rank of the first, mirroring the
/// male-minus-female convention of the gender design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankPair {
    pub resume_id: String,
    pub proportion: f64,
    pub rank_first: f64,
    pub rank_second: f64,
    pub rank_gap: f64,
}

pub fn make_rank_pair(
    score_first: u8,
    score_second: u8,
    resume_id: &str,
    proportion: f64,
) -> RankPair {
    for score in [score_first, score_second] {
        assert!(score <= 10, "score {score} outside 0-10");
    }
    let ranks = fractional_rank_desc(&[score_first as f64, score_second as f64]);
    RankPair {
        resume_id: resume_id.to_string(),
        proportion,
        rank_first: ranks[0],
        rank_second: ranks[1],
        rank_gap: ranks[1] - ranks[0],
    }
}

/// Counts per bias case, with every label present (zero-filled) so reports
/// and figures have a fixed row set.
pub fn case_frequencies<'a>(
    triples: impl IntoIterator<Item = &'a RankTriple>,
) -> BTreeMap<BiasCase, usize> {
    let mut counts: BTreeMap<BiasCase, usize> =
        BiasCase::ALL.iter().map(|&c| (c, 0)).collect();
    for triple in triples {
        *counts.get_mut(&triple.bias_case).expect("all cases present") += 1;
    }
    counts
}
