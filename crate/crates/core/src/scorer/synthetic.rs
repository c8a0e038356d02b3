//! Deterministic scorer with configurable planted effects.
//!
//! Used to validate the whole measurement chain: a scorer with a known
//! bias structure goes in, and the statistical battery must recover exactly
//! that structure. Scores follow
//!
//! `clamp(round(base + taste + trend * ln(words) + noise), 0, 10)`
//!
//! where `base` is a stable hash of the (truncated) resume text, the taste
//! and trend terms apply only to the configured target treatment, and the
//! noise is drawn from a generator keyed by (seed, resume, treatment,
//! proportion) so every request scores identically on every run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ScoreRequest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScorerConfig {
    pub model_id: String,
    pub seed: u64,
    /// Treatment label the planted effects attach to.
    pub target: String,
    /// Constant score shift for the target treatment.
    pub taste_delta: f64,
    /// Per-log-word score shift for the target treatment.
    pub trend_coeff: f64,
    /// Noise standard deviation for non-target treatments.
    pub noise_sd: f64,
    /// Noise standard deviation for the target treatment; defaults to
    /// `noise_sd` when absent.
    pub target_noise_sd: Option<f64>,
}

impl SyntheticScorerConfig {
    /// Named configurations covering the broad bias structures: no bias,
    /// a fixed preference, a preference that grows with information, and an
    /// equal-mean difference in score dispersion.
    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        let base = |model: &str| SyntheticScorerConfig {
            model_id: model.to_string(),
            seed,
            target: "Female".to_string(),
            taste_delta: 0.0,
            trend_coeff: 0.0,
            noise_sd: 1.0,
            target_noise_sd: None,
        };
        match name {
            "unbiased" => Some(base("synthetic-unbiased")),
            "taste" => Some(SyntheticScorerConfig {
                taste_delta: 1.0,
                noise_sd: 1.0,
                ..base("synthetic-taste")
            }),
            "statistical" => Some(SyntheticScorerConfig {
                // The shift crosses zero near 30 retained words and grows
                // with the log of the retained count after that.
                taste_delta: -2.55,
                trend_coeff: 0.75,
                noise_sd: 1.0,
                ..base("synthetic-statistical")
            }),
            "spread" => Some(SyntheticScorerConfig {
                noise_sd: 0.5,
                target_noise_sd: Some(3.2),
                ..base("synthetic-spread")
            }),
            _ => None,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["unbiased", "taste", "statistical", "spread"]
    }
}

pub struct SyntheticScorer {
    config: SyntheticScorerConfig,
}

impl SyntheticScorer {
    pub fn new(config: SyntheticScorerConfig) -> Self {
        SyntheticScorer { config }
    }

    pub fn config(&self) -> &SyntheticScorerConfig {
        &self.config
    }

    /// Score a request. Always succeeds; the synthetic scorer never refuses.
    pub fn score(&self, request: &ScoreRequest) -> (u8, String) {
        let cfg = &self.config;
        let is_target = request.treatment.label() == cfg.target;
        let base = base_score(&request.resume_text);
        let mut value = base;
        if is_target {
            value += cfg.taste_delta;
            value += cfg.trend_coeff * (request.retained_words.max(1) as f64).ln();
        }
        let sd = if is_target {
            cfg.target_noise_sd.unwrap_or(cfg.noise_sd)
        } else {
            cfg.noise_sd
        };
        if sd > 0.0 {
            let seed = noise_seed(
                cfg.seed,
                &request.resume_id,
                request.treatment.label(),
                request.proportion,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sd).expect("positive standard deviation");
            value += normal.sample(&mut rng);
        }
        let score = value.round().clamp(0.0, 10.0) as u8;
        let overview = format!("synthetic assessment: {score}/10");
        (score, overview)
    }
}

/// Stable base score in [2.5, 7.5] with 0.01 resolution, derived from the
/// text alone so all treatments of the same truncation share it. The range
/// is symmetric about the scale midpoint, so clamping wide noise at 0 and
/// 10 cannot shift group means.
fn base_score(text: &str) -> f64 {
    let digest = Sha256::digest(text.as_bytes());
    let raw = u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    2.5 + (raw % 501) as f64 / 100.0
}

/// Noise stream key: one independent draw per (run seed, resume, treatment,
/// truncation level), stable across process restarts.
fn noise_seed(seed: u64, resume_id: &str, treatment_label: &str, proportion: f64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(resume_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(treatment_label.as_bytes());
    hasher.update([0x1f]);
    hasher.update(proportion.to_bits().to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
