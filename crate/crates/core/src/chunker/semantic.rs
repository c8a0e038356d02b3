//! Embedding-driven splitter: the resume is cut into sentences, adjacent
//! sentences are compared by cosine distance of their embeddings, and a split
//! is placed wherever the distance exceeds the 30th-percentile breakpoint of
//! all adjacent distances. The embedding source is abstract so tests can feed
//! fixed vectors and production can call a hosted endpoint.

use std::fmt;
use std::time::Duration;

use serde::Deserialize;

use crate::corpus::Resume;

use super::{BackendKind, ChunkError, ChunkSet};

/// Percentile of adjacent-distance values above which a split is placed.
pub const BREAKPOINT_PERCENTILE: f64 = 30.0;

#[derive(Debug)]
pub struct EmbedError {
    pub status: Option<u16>,
    pub retryable: bool,
    pub message: String,
}

impl EmbedError {
    pub fn fatal(message: impl Into<String>) -> Self {
        EmbedError {
            status: None,
            retryable: false,
            message: message.into(),
        }
    }
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if let Some(status) = self.status {
            write!(f, " (HTTP {status})")?;
        }
        if self.retryable {
            write!(f, " [retryable]")?;
        }
        Ok(())
    }
}

impl std::error::Error for EmbedError {}

/// Maps each sentence to one fixed-length vector. Implementations must return
/// exactly one vector per input sentence, in order.
pub trait SentenceEmbedder {
    fn embed(&self, sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

/// Sentence boundaries: a run of `.`/`!`/`?` (plus trailing closers) followed
/// by whitespace, or a line break. Abbreviations like "Dr." split too; that
/// is acceptable noise for breakpoint detection, not prose segmentation.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, sentences: &mut Vec<String>| {
        let trimmed = current.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
        current.clear();
    };
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\n' {
            flush(&mut current, &mut sentences);
            continue;
        }
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            while matches!(chars.peek(), Some('"' | '\'' | ')' | ']')) {
                current.push(chars.next().expect("peeked"));
            }
            match chars.peek() {
                None => flush(&mut current, &mut sentences),
                Some(next) if next.is_whitespace() => flush(&mut current, &mut sentences),
                _ => {}
            }
        }
    }
    flush(&mut current, &mut sentences);
    sentences
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::fatal(format!(
            "embedding dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(EmbedError::fatal("zero-length embedding vector"));
    }
    Ok((1.0 - dot / (norm_a * norm_b)).max(0.0))
}

/// Linear-interpolation percentile over the sorted values: rank p/100*(n-1),
/// interpolated between the bracketing order statistics.
pub fn percentile_linear(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    assert!((0.0..=100.0).contains(&p), "percentile out of range: {p}");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN distances"));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn chunk_semantic(
    resume: &Resume,
    embedder: &dyn SentenceEmbedder,
) -> Result<ChunkSet, ChunkError> {
    let sentences = split_sentences(&resume.text);
    let elements = if sentences.len() <= 1 {
        vec![if sentences.is_empty() {
            resume.text.trim().to_string()
        } else {
            sentences[0].clone()
        }]
    } else {
        let embeddings = embedder.embed(&sentences)?;
        if embeddings.len() != sentences.len() {
            return Err(ChunkError::Embedding(EmbedError::fatal(format!(
                "expected {} embeddings, got {}",
                sentences.len(),
                embeddings.len()
            ))));
        }
        let mut distances = Vec::with_capacity(sentences.len() - 1);
        for pair in embeddings.windows(2) {
            distances.push(cosine_distance(&pair[0], &pair[1])?);
        }
        let threshold = percentile_linear(&distances, BREAKPOINT_PERCENTILE);
        let mut elements = Vec::new();
        let mut group: Vec<&str> = vec![&sentences[0]];
        for (i, sentence) in sentences.iter().enumerate().skip(1) {
            if distances[i - 1] > threshold {
                elements.push(group.join(" "));
                group = Vec::new();
            }
            group.push(sentence);
        }
        elements.push(group.join(" "));
        elements
    };
    Ok(ChunkSet {
        resume_id: resume.id.clone(),
        elements,
        backend: BackendKind::Embedding,
    })
}

/// Client for a hosted embeddings endpoint speaking the common JSON shape
/// (`{"model": ..., "input": [...]}` in, `{"data": [{"embedding": [...]}]}`
/// out). The credential is read from the named environment variable at call
/// time and never stored.
pub struct HttpEmbedder {
    pub endpoint_url: String,
    pub model_id: String,
    pub credential_env_var: Option<String>,
    pub timeout: Duration,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingRow>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    embedding: Vec<f64>,
}

impl SentenceEmbedder for HttpEmbedder {
    fn embed(&self, sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| EmbedError::fatal(format!("client build failed: {e}")))?;
        let mut request = client.post(&self.endpoint_url).json(&serde_json::json!({
            "model": self.model_id,
            "input": sentences,
        }));
        if let Some(var) = &self.credential_env_var {
            let credential = std::env::var(var).map_err(|_| {
                EmbedError::fatal(format!("credential environment variable {var} is not set"))
            })?;
            request = request.bearer_auth(credential);
        }
        let response = request.send().map_err(|e| EmbedError {
            status: None,
            retryable: true,
            message: format!("embeddings endpoint unreachable: {e}"),
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(EmbedError {
                status: Some(status.as_u16()),
                retryable: status.as_u16() == 429 || status.is_server_error(),
                message: format!("embeddings endpoint {} failed", self.endpoint_url),
            });
        }
        let parsed: EmbeddingResponse = response
            .json()
            .map_err(|e| EmbedError::fatal(format!("embeddings response malformed: {e}")))?;
        Ok(parsed.data.into_iter().map(|row| row.embedding).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Industry;

    fn resume(text: &str) -> Resume {
        Resume::new("r1", Industry::Healthcare, "Nurse", text).unwrap()
    }

    /// Embeds sentence i as the unit vector at a precomputed cumulative angle,
    /// so adjacent cosine distances equal the planned values exactly (up to
    /// fp rounding).
    struct AngleEmbedder {
        angles: Vec<f64>,
    }

    impl AngleEmbedder {
        fn from_distances(distances: &[f64]) -> Self {
            let mut angles = vec![0.0];
            for d in distances {
                let prev = *angles.last().expect("non-empty");
                angles.push(prev + (1.0 - d).acos());
            }
            AngleEmbedder { angles }
        }
    }

    impl SentenceEmbedder for AngleEmbedder {
        fn embed(&self, sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
            assert_eq!(sentences.len(), self.angles.len());
            Ok(self
                .angles
                .iter()
                .map(|a| vec![a.cos(), a.sin()])
                .collect())
        }
    }

    struct PanickingEmbedder;

    impl SentenceEmbedder for PanickingEmbedder {
        fn embed(&self, _sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
            panic!("embedder must not be called for single-sentence input");
        }
    }

    struct ShortEmbedder;

    impl SentenceEmbedder for ShortEmbedder {
        fn embed(&self, sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
            Ok(vec![vec![1.0, 0.0]; sentences.len() - 1])
        }
    }

    #[test]
    fn sentences_split_on_terminators_and_newlines() {
        assert_eq!(
            split_sentences("One here. Two there! Three maybe?"),
            vec!["One here.", "Two there!", "Three maybe?"]
        );
        assert_eq!(
            split_sentences("Improved by 3.5 percent. Done."),
            vec!["Improved by 3.5 percent.", "Done."]
        );
        assert_eq!(
            split_sentences("line one\nline two"),
            vec!["line one", "line two"]
        );
        assert_eq!(
            split_sentences("He said \"done.\" Next."),
            vec!["He said \"done.\"", "Next."]
        );
        assert!(split_sentences("   \n  ").is_empty());
    }

    #[test]
    fn percentile_matches_hand_computed_values() {
        let d = [0.1, 0.4, 0.2, 0.8];
        // sorted [0.1, 0.2, 0.4, 0.8]; rank 0.3*3 = 0.9 -> 0.1 + 0.9*(0.2-0.1)
        assert!((percentile_linear(&d, 30.0) - 0.19).abs() < 1e-12);
        assert!((percentile_linear(&d, 0.0) - 0.1).abs() < 1e-12);
        assert!((percentile_linear(&d, 100.0) - 0.8).abs() < 1e-12);
        assert!((percentile_linear(&d, 50.0) - 0.3).abs() < 1e-12);
        assert!((percentile_linear(&[0.7], 30.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn cosine_distance_basics() {
        assert!((cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(cosine_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap() < 1e-12);
        assert!((cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!(cosine_distance(&[1.0], &[1.0, 0.0]).is_err());
        assert!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn splits_fall_where_distance_exceeds_breakpoint() {
        // Adjacent distances [0.1, 0.4, 0.2, 0.8]; threshold 0.19 (30th
        // percentile); splits after sentences 1, 2, 3.
        let text = "Alpha one. Beta two. Gamma three. Delta four. Epsilon five.";
        let embedder = AngleEmbedder::from_distances(&[0.1, 0.4, 0.2, 0.8]);
        let chunks = chunk_semantic(&resume(text), &embedder).unwrap();
        assert_eq!(
            chunks.elements,
            vec![
                "Alpha one. Beta two.",
                "Gamma three.",
                "Delta four.",
                "Epsilon five.",
            ]
        );
        assert_eq!(chunks.backend, BackendKind::Embedding);
    }

    #[test]
    fn orthogonal_jumps_group_similar_neighbors() {
        // Distances [0, 1, 0, 1]: threshold 0 -> split exactly at the jumps.
        let text = "A one. A two. B one. B two. C one.";
        let embedder = AngleEmbedder::from_distances(&[0.0, 1.0, 0.0, 1.0]);
        let chunks = chunk_semantic(&resume(text), &embedder).unwrap();
        assert_eq!(
            chunks.elements,
            vec!["A one. A two.", "B one. B two.", "C one."]
        );
    }

    /// Same vector for every sentence: all adjacent distances are exactly 0,
    /// the threshold is 0, and the strict > comparison never splits.
    struct ConstantEmbedder;

    impl SentenceEmbedder for ConstantEmbedder {
        fn embed(&self, sentences: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
            Ok(vec![vec![0.6, 0.8]; sentences.len()])
        }
    }

    #[test]
    fn equal_distances_never_split() {
        let text = "One here. Two here. Three here. Four here.";
        let chunks = chunk_semantic(&resume(text), &ConstantEmbedder).unwrap();
        assert_eq!(chunks.elements.len(), 1);
    }

    #[test]
    fn single_sentence_skips_the_embedder() {
        let chunks = chunk_semantic(&resume("Just one sentence."), &PanickingEmbedder).unwrap();
        assert_eq!(chunks.elements, vec!["Just one sentence."]);
    }

    #[test]
    fn wrong_embedding_count_is_an_error() {
        let err = chunk_semantic(&resume("One. Two. Three."), &ShortEmbedder).unwrap_err();
        assert!(err.to_string().contains("expected 3 embeddings"), "{err}");
    }
}
