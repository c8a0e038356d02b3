//! Splitting resumes into coherent elements and sampling truncated versions.
//!
//! Two backends produce the element list: a line-oriented boundary splitter
//! (offline, default) and a semantic splitter driven by sentence embeddings.
//! Truncation then keeps a seeded uniform sample of elements in original
//! order; the seed is derived from (run seed, resume id, proportion) only, so
//! every treatment arm of a resume keeps exactly the same content and the
//! injected attribute line stays the sole difference between arms.

mod boundary;
mod semantic;

pub use boundary::chunk_boundary;
pub use semantic::{
    chunk_semantic, cosine_distance, percentile_linear, split_sentences, EmbedError,
    HttpEmbedder, SentenceEmbedder,
};

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{count_words, Resume};

#[derive(Debug, Error)]
pub enum ChunkError {
    #[error("proportion must be in (0, 1], got {0}")]
    InvalidProportion(f64),
    #[error("embedding backend: {0}")]
    Embedding(#[from] EmbedError),
}

/// Which splitter produced a chunk set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Boundary,
    Embedding,
}

#[derive(Debug, Error)]
#[error("unknown chunker backend `{0}` (expected boundary or embedding)")]
pub struct UnknownBackend(String);

impl FromStr for BackendKind {
    type Err = UnknownBackend;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boundary" => Ok(BackendKind::Boundary),
            "embedding" => Ok(BackendKind::Embedding),
            other => Err(UnknownBackend(other.to_string())),
        }
    }
}

/// A configured splitter. The embedding variant owns its embedder so callers
/// construct it once per run.
pub enum Backend {
    Boundary,
    Embedding(Box<dyn SentenceEmbedder>),
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Boundary => BackendKind::Boundary,
            Backend::Embedding(_) => BackendKind::Embedding,
        }
    }
}

/// Ordered elements of one resume. Joining all elements preserves every
/// non-blank line (boundary backend) or every sentence (embedding backend) of
/// the source text in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSet {
    pub resume_id: String,
    pub elements: Vec<String>,
    pub backend: BackendKind,
}

impl ChunkSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// One truncated body: the kept element indices (ascending) and the joined
/// text, with the retained word count measured on the joined text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedResume {
    pub resume_id: String,
    pub proportion: f64,
    pub kept_indices: Vec<usize>,
    pub text: String,
    pub retained_words: usize,
}

pub fn chunk(resume: &Resume, backend: &Backend) -> Result<ChunkSet, ChunkError> {
    match backend {
        Backend::Boundary => Ok(chunk_boundary(resume)),
        Backend::Embedding(embedder) => chunk_semantic(resume, embedder.as_ref()),
    }
}

/// Seed for truncating one resume at one proportion. Deliberately independent
/// of treatment, so all arms share the same kept elements.
pub fn truncation_seed(run_seed: u64, resume_id: &str, proportion: f64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(resume_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(proportion.to_bits().to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Keeps `max(1, round(proportion * n))` elements, chosen uniformly without
/// replacement and reassembled in original order.
pub fn truncate(
    chunks: &ChunkSet,
    proportion: f64,
    seed: u64,
) -> Result<TruncatedResume, ChunkError> {
    if !(proportion > 0.0 && proportion <= 1.0) {
        return Err(ChunkError::InvalidProportion(proportion));
    }
    let n = chunks.elements.len();
    let k = ((proportion * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept_indices = rand::seq::index::sample(&mut rng, n, k).into_vec();
    kept_indices.sort_unstable();
    let text = kept_indices
        .iter()
        .map(|&i| chunks.elements[i].as_str())
        .collect::<Vec<_>>()
        .join("\n\n");
    let retained_words = count_words(&text);
    Ok(TruncatedResume {
        resume_id: chunks.resume_id.clone(),
        proportion,
        kept_indices,
        text,
        retained_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_synthetic;
    use proptest::prelude::*;

    fn chunk_set(n: usize) -> ChunkSet {
        ChunkSet {
            resume_id: "r1".to_string(),
            elements: (0..n).map(|i| format!("element {i} body")).collect(),
            backend: BackendKind::Boundary,
        }
    }

    #[test]
    fn truncate_keeps_rounded_count_in_order() {
        let t = truncate(&chunk_set(10), 0.4, 99).unwrap();
        assert_eq!(t.kept_indices.len(), 4);
        assert!(t.kept_indices.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t.retained_words, count_words(&t.text));
    }

    #[test]
    fn truncate_full_proportion_is_identity() {
        let chunks = chunk_set(7);
        let t = truncate(&chunks, 1.0, 5).unwrap();
        assert_eq!(t.kept_indices, (0..7).collect::<Vec<_>>());
        assert_eq!(t.text, chunks.elements.join("\n\n"));
    }

    #[test]
    fn truncate_floors_at_one_element() {
        let t = truncate(&chunk_set(3), 0.1, 0).unwrap();
        assert_eq!(t.kept_indices.len(), 1);
    }

    #[test]
    fn truncate_rejects_bad_proportions() {
        for p in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(truncate(&chunk_set(4), p, 0).is_err(), "proportion {p}");
        }
    }

    #[test]
    fn truncate_is_deterministic_in_seed() {
        let chunks = chunk_set(12);
        let a = truncate(&chunks, 0.4, 7).unwrap();
        let b = truncate(&chunks, 0.4, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncation_seed_separates_inputs() {
        let base = truncation_seed(1, "r1", 0.4);
        assert_eq!(base, truncation_seed(1, "r1", 0.4));
        assert_ne!(base, truncation_seed(2, "r1", 0.4));
        assert_ne!(base, truncation_seed(1, "r2", 0.4));
        assert_ne!(base, truncation_seed(1, "r1", 0.6));
    }

    #[test]
    fn mean_retained_words_nondecreasing_in_proportion() {
        let corpus = generate_synthetic(1, 3);
        let resume = &corpus.resumes()[0];
        let chunks = chunk_boundary(resume);
        let mut means = Vec::new();
        for proportion in [0.1, 0.4, 0.6, 1.0] {
            let total: usize = (0..50)
                .map(|s| {
                    truncate(&chunks, proportion, truncation_seed(s, &resume.id, proportion))
                        .unwrap()
                        .retained_words
                })
                .sum();
            means.push(total as f64 / 50.0);
        }
        assert!(means.windows(2).all(|w| w[0] <= w[1]), "means {means:?}");
        let full = truncate(&chunks, 1.0, 0).unwrap();
        assert_eq!(full.retained_words, resume.word_count);
    }

    #[test]
    fn backend_kind_parses() {
        assert_eq!("boundary".parse::<BackendKind>().unwrap(), BackendKind::Boundary);
        assert_eq!("Embedding".parse::<BackendKind>().unwrap(), BackendKind::Embedding);
        assert!("semantic?".parse::<BackendKind>().is_err());
    }

    #[test]
    fn synthetic_resume_words_survive_chunk_and_full_truncate() {
        for resume in generate_synthetic(5, 21).resumes() {
            let chunks = chunk_boundary(resume);
            let t = truncate(&chunks, 1.0, 11).unwrap();
            assert_eq!(t.retained_words, resume.word_count, "{}", resume.id);
        }
    }

    proptest! {
        #[test]
        fn truncate_counts_and_bounds_hold(
            n in 1usize..40,
            proportion in 0.01f64..=1.0,
            seed in any::<u64>(),
        ) {
            let chunks = chunk_set(n);
            let t = truncate(&chunks, proportion, seed).unwrap();
            let expected = ((proportion * n as f64).round() as usize).clamp(1, n);
            prop_assert_eq!(t.kept_indices.len(), expected);
            prop_assert!(t.kept_indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(t.kept_indices.iter().all(|&i| i < n));
            let full = truncate(&chunks, 1.0, seed).unwrap();
            prop_assert!(t.retained_words <= full.retained_words);
        }
    }
}
