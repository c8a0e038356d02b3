//! Append-only score storage with restart support.
//!
//! Every completed score is flushed to `scores.jsonl` the moment it arrives,
//! and refusals land in `rejections.jsonl`, so an interrupted collection run
//! loses at most the requests in flight. On reopen the store replays both
//! files and exposes the set of request fingerprints already answered, which
//! the collector uses to skip finished work.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{RejectionRecord, ScoreRecord, ScorerError};

pub const SCORES_FILE: &str = "scores.jsonl";
pub const REJECTIONS_FILE: &str = "rejections.jsonl";

pub struct ScoreStore {
    scores_path: PathBuf,
    scores_file: File,
    rejections_file: File,
    records: Vec<ScoreRecord>,
    rejections: Vec<RejectionRecord>,
    answered: BTreeSet<String>,
}

impl ScoreStore {
    /// Open (creating if absent) the score files inside `dir` and replay any
    /// existing content.
    pub fn open(dir: &Path) -> Result<Self, ScorerError> {
        std::fs::create_dir_all(dir).map_err(|source| ScorerError::Store {
            path: dir.to_path_buf(),
            detail: source.to_string(),
        })?;
        let scores_path = dir.join(SCORES_FILE);
        let rejections_path = dir.join(REJECTIONS_FILE);

        let records: Vec<ScoreRecord> = replay_lines(&scores_path)?;
        let rejections: Vec<RejectionRecord> = replay_lines(&rejections_path)?;

        let mut answered = BTreeSet::new();
        let mut unique_keys = BTreeSet::new();
        for record in &records {
            answered.insert(record.request_fingerprint.clone());
            let key = (
                record.resume_id.clone(),
                record.treatment.label().to_string(),
                record.proportion.to_bits(),
                record.model_id.clone(),
            );
            if !unique_keys.insert(key) {
                return Err(ScorerError::Store {
                    path: scores_path,
                    detail: format!(
                        "duplicate score for resume `{}` treatment `{}` proportion {} model `{}`",
                        record.resume_id, record.treatment, record.proportion, record.model_id
                    ),
                });
            }
        }
        for rejection in &rejections {
            answered.insert(rejection.request_fingerprint.clone());
        }

        let open_append = |path: &Path| -> Result<File, ScorerError> {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|source| ScorerError::Store {
                    path: path.to_path_buf(),
                    detail: source.to_string(),
                })
        };
        let scores_file = open_append(&scores_path)?;
        let rejections_file = open_append(&rejections_path)?;
        Ok(ScoreStore {
            scores_path,
            scores_file,
            rejections_file,
            records,
            rejections,
            answered,
        })
    }

    /// Whether a request with this fingerprint already has a stored answer
    /// (score or rejection).
    pub fn is_answered(&self, fingerprint: &str) -> bool {
        self.answered.contains(fingerprint)
    }

    pub fn append_score(&mut self, record: ScoreRecord) -> Result<(), ScorerError> {
        self.write_line(&record, true)?;
        self.answered.insert(record.request_fingerprint.clone());
        self.records.push(record);
        Ok(())
    }

    pub fn append_rejection(&mut self, rejection: RejectionRecord) -> Result<(), ScorerError> {
        self.write_line(&rejection, false)?;
        self.answered.insert(rejection.request_fingerprint.clone());
        self.rejections.push(rejection);
        Ok(())
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn rejections(&self) -> &[RejectionRecord] {
        &self.rejections
    }

    fn write_line<T: serde::Serialize>(
        &mut self,
        value: &T,
        to_scores: bool,
    ) -> Result<(), ScorerError> {
        let mut line = serde_json::to_string(value).map_err(|source| ScorerError::Store {
            path: self.scores_path.clone(),
            detail: source.to_string(),
        })?;
        line.push('\n');
        let file = if to_scores {
            &mut self.scores_file
        } else {
            &mut self.rejections_file
        };
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|source| ScorerError::Store {
                path: self.scores_path.clone(),
                detail: source.to_string(),
            })
    }
}

fn replay_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, ScorerError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|source| ScorerError::Store {
        path: path.to_path_buf(),
        detail: source.to_string(),
    })?;
    let mut out = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ScorerError::Store {
            path: path.to_path_buf(),
            detail: source.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| ScorerError::Store {
            path: path.to_path_buf(),
            detail: format!("line {}: {source}", index + 1),
        })?;
        out.push(value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterfactual::Treatment;

    fn record(resume: &str, treatment: Treatment, proportion: f64, print: &str) -> ScoreRecord {
        ScoreRecord {
            resume_id: resume.to_string(),
            treatment,
            proportion,
            score: 7,
            overview: "solid candidate".to_string(),
            model_id: "test-model".to_string(),
            retained_words: 120,
            request_fingerprint: print.to_string(),
            timestamp: "2024-01-01T00:00:00Z".to_string(),
        }
    }

    #[test]
    fn round_trips_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = ScoreStore::open(dir.path()).unwrap();
            store
                .append_score(record("r1", Treatment::value("Female"), 1.0, "fp1"))
                .unwrap();
            store
                .append_score(record("r1", Treatment::Neutral, 1.0, "fp2"))
                .unwrap();
        }
        let store = ScoreStore::open(dir.path()).unwrap();
        assert_eq!(store.records().len(), 2);
        assert!(store.is_answered("fp1"));
        assert!(store.is_answered("fp2"));
        assert!(!store.is_answered("fp3"));
        assert_eq!(store.records()[0].resume_id, "r1");
        assert_eq!(store.records()[0].score, 7);
    }

    #[test]
    fn rejections_count_as_answered() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = ScoreStore::open(dir.path()).unwrap();
            store
                .append_rejection(RejectionRecord {
                    resume_id: "r9".to_string(),
                    treatment: Treatment::value("Male"),
                    proportion: 0.4,
                    model_id: "test-model".to_string(),
                    reason: "refused to rate".to_string(),
                    raw: "I cannot help with that".to_string(),
                    request_fingerprint: "fp-reject".to_string(),
                })
                .unwrap();
        }
        let store = ScoreStore::open(dir.path()).unwrap();
        assert!(store.is_answered("fp-reject"));
        assert_eq!(store.records().len(), 0);
        assert_eq!(store.rejections().len(), 1);
        assert_eq!(store.rejections()[0].reason, "refused to rate");
    }

    #[test]
    fn appends_accumulate_rather_than_truncate() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = ScoreStore::open(dir.path()).unwrap();
            store
                .append_score(record("r1", Treatment::Neutral, 1.0, "fp1"))
                .unwrap();
        }
        {
            let mut store = ScoreStore::open(dir.path()).unwrap();
            store
                .append_score(record("r2", Treatment::Neutral, 1.0, "fp2"))
                .unwrap();
        }
        let store = ScoreStore::open(dir.path()).unwrap();
        assert_eq!(store.records().len(), 2);
    }

    #[test]
    fn duplicate_unique_key_is_rejected_at_replay() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = ScoreStore::open(dir.path()).unwrap();
            // Different fingerprints but the same identifying tuple: this
            // only happens when the file was assembled from mismatched runs.
            store
                .append_score(record("r1", Treatment::Neutral, 1.0, "fp1"))
                .unwrap();
            store
                .append_score(record("r1", Treatment::Neutral, 1.0, "fp-other"))
                .unwrap();
        }
        match ScoreStore::open(dir.path()) {
            Err(ScorerError::Store { detail, .. }) => {
                assert!(detail.contains("duplicate score"), "{detail}");
                assert!(detail.contains("r1"));
            }
            other => panic!("expected duplicate error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn corrupt_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(SCORES_FILE), "{not json\n").unwrap();
        match ScoreStore::open(dir.path()) {
            Err(ScorerError::Store { detail, .. }) => assert!(detail.contains("line 1")),
            other => panic!("expected corrupt line error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn blank_lines_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let line = serde_json::to_string(&record("r1", Treatment::Neutral, 1.0, "fp1")).unwrap();
        std::fs::write(dir.path().join(SCORES_FILE), format!("{line}\n\n")).unwrap();
        let store = ScoreStore::open(dir.path()).unwrap();
        assert_eq!(store.records().len(), 1);
    }
}
