//! Score collection: turn prepared requests into persisted score records.
//!
//! Each request is identified by a fingerprint over everything that could
//! change the answer (model, resume, treatment, truncation level, and the
//! exact prompt). The collector skips requests whose fingerprint already has
//! a stored answer, so an interrupted run picks up where it stopped.

mod persist;
mod provider;
mod synthetic;

pub use persist::{ScoreStore, REJECTIONS_FILE, SCORES_FILE};
pub use provider::{ProviderClient, ProviderConfig};
pub use synthetic::{SyntheticScorer, SyntheticScorerConfig};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::counterfactual::Treatment;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("credential environment variable `{var}` is not set")]
    MissingCredential { var: String },
    #[error("transport failure: {detail}")]
    Transport { detail: String },
    #[error("HTTP {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("gave up after {attempts} attempts; last failure: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("unusable provider response: {detail}")]
    BadPayload { detail: String },
    #[error("score store {path}: {detail}")]
    Store { path: PathBuf, detail: String },
}

/// One persisted score. The `(resume_id, treatment, proportion, model_id)`
/// tuple is unique within a store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub resume_id: String,
    pub treatment: Treatment,
    pub proportion: f64,
    pub score: u8,
    pub overview: String,
    pub model_id: String,
    pub retained_words: usize,
    pub request_fingerprint: String,
    pub timestamp: String,
}

/// A refusal or unusable answer, kept for the audit trail; the triple this
/// request belonged to is excluded from analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRecord {
    pub resume_id: String,
    pub treatment: Treatment,
    pub proportion: f64,
    pub model_id: String,
    pub reason: String,
    pub raw: String,
    pub request_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreOutcome {
    Scored(ScoreRecord),
    Rejected(RejectionRecord),
}

/// A fully prepared scoring request.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRequest {
    pub resume_id: String,
    pub treatment: Treatment,
    pub proportion: f64,
    pub retained_words: usize,
    /// Truncated resume text, identical across treatments of the same
    /// resume and truncation level.
    pub resume_text: String,
    /// Complete rendered prompt sent to the scorer.
    pub prompt: String,
    pub model_id: String,
    pub fingerprint: String,
}

impl ScoreRequest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        resume_id: impl Into<String>,
        treatment: Treatment,
        proportion: f64,
        retained_words: usize,
        resume_text: String,
        prompt: String,
        model_id: impl Into<String>,
    ) -> Self {
        let resume_id = resume_id.into();
        let model_id = model_id.into();
        let fingerprint =
            request_fingerprint(&model_id, &resume_id, &treatment, proportion, &prompt);
        ScoreRequest {
            resume_id,
            treatment,
            proportion,
            retained_words,
            resume_text,
            prompt,
            model_id,
            fingerprint,
        }
    }
}

/// Hash of every request component that could change the model's answer.
pub fn request_fingerprint(
    model_id: &str,
    resume_id: &str,
    treatment: &Treatment,
    proportion: f64,
    prompt: &str,
) -> String {
    let mut hasher = Sha256::new();
    for part in [model_id.as_bytes(), resume_id.as_bytes(), treatment.label().as_bytes()] {
        hasher.update(part);
        hasher.update([0x1f]);
    }
    hasher.update(proportion.to_bits().to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())
}

pub enum ScoringBackend {
    Synthetic(SyntheticScorer),
    Provider(ProviderClient),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub scored: usize,
    pub rejected: usize,
    /// Requests skipped because the store already held their answer.
    pub skipped: usize,
}

/// Score every request not yet answered in the store. Answers are flushed
/// to disk as they arrive; on error, everything already flushed survives
/// for the next attempt.
pub fn collect_scores(
    requests: &[ScoreRequest],
    backend: &ScoringBackend,
    store: &mut ScoreStore,
) -> Result<CollectionSummary, ScorerError> {
    let pending: Vec<&ScoreRequest> = requests
        .iter()
        .filter(|r| !store.is_answered(&r.fingerprint))
        .collect();
    let skipped = requests.len() - pending.len();

    match backend {
        ScoringBackend::Synthetic(scorer) => {
            let mut scored = 0usize;
            for request in pending {
                let (score, overview) = scorer.score(request);
                store.append_score(ScoreRecord {
                    resume_id: request.resume_id.clone(),
                    treatment: request.treatment.clone(),
                    proportion: request.proportion,
                    score,
                    overview,
                    model_id: request.model_id.clone(),
                    retained_words: request.retained_words,
                    request_fingerprint: request.fingerprint.clone(),
                    timestamp: now_timestamp(),
                })?;
                scored += 1;
            }
            Ok(CollectionSummary {
                scored,
                rejected: 0,
                skipped,
            })
        }
        ScoringBackend::Provider(client) => {
            let owned: Vec<ScoreRequest> = pending.into_iter().cloned().collect();
            let (scored, rejected) = provider::run_batch(client, owned, store)?;
            Ok(CollectionSummary {
                scored,
                rejected,
                skipped,
            })
        }
    }
}

pub(crate) fn now_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_request() -> ScoreRequest {
        ScoreRequest::new(
            "r1",
            Treatment::value("Female"),
            0.4,
            120,
            "body".to_string(),
            "prompt".to_string(),
            "model-x",
        )
    }

    #[test]
    fn fingerprint_is_stable_and_component_sensitive() {
        let a = base_request();
        let b = base_request();
        assert_eq!(a.fingerprint, b.fingerprint);
        assert_eq!(a.fingerprint.len(), 64);

        let mut variations = vec![
            request_fingerprint("model-y", "r1", &Treatment::value("Female"), 0.4, "prompt"),
            request_fingerprint("model-x", "r2", &Treatment::value("Female"), 0.4, "prompt"),
            request_fingerprint("model-x", "r1", &Treatment::value("Male"), 0.4, "prompt"),
            request_fingerprint("model-x", "r1", &Treatment::Neutral, 0.4, "prompt"),
            request_fingerprint("model-x", "r1", &Treatment::value("Female"), 0.6, "prompt"),
            request_fingerprint("model-x", "r1", &Treatment::value("Female"), 0.4, "other"),
        ];
        variations.push(a.fingerprint.clone());
        let distinct: std::collections::BTreeSet<&String> = variations.iter().collect();
        assert_eq!(distinct.len(), variations.len());
    }

    #[test]
    fn synthetic_collection_persists_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = SyntheticScorer::new(SyntheticScorerConfig::preset("unbiased", 3).unwrap());
        let backend = ScoringBackend::Synthetic(scorer);
        let requests: Vec<ScoreRequest> = (0..6)
            .flat_map(|i| {
                let id = format!("r{i}");
                [Treatment::value("Female"), Treatment::value("Male"), Treatment::Neutral]
                    .into_iter()
                    .map(move |t| {
                        ScoreRequest::new(
                            id.clone(),
                            t,
                            1.0,
                            200,
                            format!("text of {id}"),
                            format!("prompt of {id}"),
                            "synthetic-unbiased",
                        )
                    })
            })
            .collect();

        let mut store = ScoreStore::open(dir.path()).unwrap();
        let first = collect_scores(&requests, &backend, &mut store).unwrap();
        assert_eq!(first.scored, 18);
        assert_eq!(first.skipped, 0);
        assert_eq!(store.records().len(), 18);
        drop(store);

        // Same requests against the same directory: everything is already
        // answered.
        let mut store = ScoreStore::open(dir.path()).unwrap();
        let second = collect_scores(&requests, &backend, &mut store).unwrap();
        assert_eq!(second.scored, 0);
        assert_eq!(second.skipped, 18);
        assert_eq!(store.records().len(), 18);
    }

    #[test]
    fn partial_store_scores_only_the_remainder() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = SyntheticScorer::new(SyntheticScorerConfig::preset("unbiased", 3).unwrap());
        let backend = ScoringBackend::Synthetic(scorer);
        let make = |i: usize| {
            ScoreRequest::new(
                format!("r{i}"),
                Treatment::Neutral,
                1.0,
                100,
                format!("text {i}"),
                format!("prompt {i}"),
                "synthetic-unbiased",
            )
        };
        let first_half: Vec<ScoreRequest> = (0..3).map(make).collect();
        let all: Vec<ScoreRequest> = (0..5).map(make).collect();

        let mut store = ScoreStore::open(dir.path()).unwrap();
        collect_scores(&first_half, &backend, &mut store).unwrap();
        let summary = collect_scores(&all, &backend, &mut store).unwrap();
        assert_eq!(summary.scored, 2);
        assert_eq!(summary.skipped, 3);
        assert_eq!(store.records().len(), 5);
    }

    #[test]
    fn synthetic_scores_are_identical_across_runs() {
        let make_store = |dir: &std::path::Path| {
            let scorer =
                SyntheticScorer::new(SyntheticScorerConfig::preset("taste", 17).unwrap());
            let backend = ScoringBackend::Synthetic(scorer);
            let requests: Vec<ScoreRequest> = (0..10)
                .map(|i| {
                    ScoreRequest::new(
                        format!("r{i}"),
                        Treatment::value("Female"),
                        0.6,
                        150,
                        format!("text {i}"),
                        format!("prompt {i}"),
                        "synthetic-taste",
                    )
                })
                .collect();
            let mut store = ScoreStore::open(dir).unwrap();
            collect_scores(&requests, &backend, &mut store).unwrap();
            store
                .records()
                .iter()
                .map(|r| (r.resume_id.clone(), r.score))
                .collect::<Vec<_>>()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        assert_eq!(make_store(dir_a.path()), make_store(dir_b.path()));
    }
}
