//! End-to-end orchestration: corpus file in, scored records and statistics
//! out.
//!
//! The pipeline is a set of idempotent stages sharing one configuration.
//! `stage_run` writes score records incrementally under a run directory whose
//! name is derived from the configuration, corpus, and prompt template, so
//! re-running the same setup resumes instead of re-spending requests.
//! `stage_analyze` works entirely offline from those records: it reassembles
//! rank triples, runs the location/dispersion/panel/industry battery, and
//! writes a timestamp-free analysis file whose bytes depend only on the
//! inputs and seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chunker::{
    self, Backend, BackendKind, ChunkError, ChunkSet, HttpEmbedder, TruncatedResume,
};
use crate::config::{ConfigError, RunConfig, ScorerChoice};
use crate::corpus::{load_corpus, Corpus, CorpusError, Industry};
use crate::counterfactual::{make_variants_from_text, AttributeSpec};
use crate::prompt::{render, PromptError, PromptTemplate};
use crate::ras::{case_frequencies, make_rank_triple, BiasCase, RankTriple};
use crate::scorer::{
    collect_scores, CollectionSummary, ProviderClient, ScoreRecord, ScoreRequest, ScoreStore,
    ScorerError, ScoringBackend, SyntheticScorer,
};
use crate::stats::{
    fit_fixed_effects, fit_industry, impact_ratio_ras, impact_ratio_score_mean_cutoff,
    moving_average_gap, paired_t_test, perm_test_level, perm_test_spread, FixedEffectsFit,
    ImpactRatioResult, IndustryFit, MovingAverageSeries, PanelRow, StatsError, TestResult,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANALYSIS_FILE: &str = "analysis.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Json { path: PathBuf, detail: String },
    #[error("run `{run_id}` not found under {dir}; complete the run stage first")]
    MissingRun { run_id: String, dir: PathBuf },
    #[error("run artifacts are inconsistent: {detail}")]
    ManifestMismatch { detail: String },
    #[error("analysis requires a two-value attribute with a neutral arm, got {detail}")]
    UnsupportedDesign { detail: String },
}

/// What the ingest stage reports about a loaded corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_resumes: usize,
    pub per_industry: BTreeMap<String, usize>,
    pub min_words: usize,
    pub max_words: usize,
    pub mean_words: f64,
    pub digest: String,
}

/// What the chunk stage reports about element extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSummary {
    pub backend: BackendKind,
    pub n_resumes: usize,
    pub total_elements: usize,
    pub min_elements: usize,
    pub max_elements: usize,
    pub mean_elements: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    /// resumes x treatments x proportions.
    pub requests: usize,
    pub scored: usize,
    pub rejected: usize,
}

/// Durable description of one completed scoring run. Holds everything the
/// offline analysis needs to validate its inputs; never credentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_digest: String,
    pub corpus_digest: String,
    pub attribute: AttributeSpec,
    pub proportions: Vec<f64>,
    pub seed: u64,
    pub model_id: String,
    /// "synthetic" or "provider".
    pub scorer_kind: String,
    pub chunker: BackendKind,
    pub n_resumes: usize,
    pub n_treatments: usize,
    pub counts: ManifestCounts,
}

/// One industry's row of the headline table: average ranks and scores per
/// arm plus the location/dispersion tests, at the full-text proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryCell {
    pub industry: String,
    pub n: usize,
    pub mean_rank_neutral: f64,
    pub mean_rank_male: f64,
    pub mean_rank_female: f64,
    /// Permutation test on mean rank difference (male minus female).
    pub rank_level: Option<TestResult>,
    /// Permutation test on rank variance difference.
    pub rank_spread: Option<TestResult>,
    pub mean_score_neutral: f64,
    pub mean_score_male: f64,
    pub mean_score_female: f64,
    /// Paired t-test on score differences (male minus female).
    pub score_level: Option<TestResult>,
    /// Permutation test on score variance difference.
    pub score_spread: Option<TestResult>,
}

/// Pooled location/dispersion tests at one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionCell {
    pub proportion: f64,
    pub n: usize,
    /// Mean of (male rank - female rank); positive favors the female arm.
    pub mean_rank_gap: f64,
    /// Mean of (male score - female score); positive favors the male arm.
    pub mean_score_gap: f64,
    pub rank_level: Option<TestResult>,
    pub rank_spread: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFrequency {
    pub case: String,
    pub count: usize,
    /// "female", "male", or "none" for the tie row.
    pub favored: String,
}

/// The full-text slice of the analysis: per-industry tables, industry
/// regression, impact ratios, and the preference-case histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineAnalysis {
    pub per_industry: Vec<IndustryCell>,
    pub industry_fit: Option<IndustryFit>,
    pub impact_ras: Option<ImpactRatioResult>,
    pub impact_score: Option<ImpactRatioResult>,
    pub case_frequencies: Vec<CaseFrequency>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisCounts {
    pub expected_requests: usize,
    pub scored: usize,
    pub rejected: usize,
    /// (resume, proportion) cells with all treatment arms scored.
    pub complete_cells: usize,
    pub excluded_cells: usize,
}

/// Complete statistical output of one run. Contains no timestamps and no
/// unordered collections, so serializing it is byte-deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutput {
    pub run_id: String,
    pub model_id: String,
    pub seed: u64,
    pub n_resumes: usize,
    pub proportions: Vec<f64>,
    /// First and second attribute value; ranks and gaps subtract the first
    /// group's rank from the second's.
    pub attribute_values: [String; 2],
    pub alpha: f64,
    /// Number of simultaneous tests charged by the familywise correction.
    pub battery_size: usize,
    /// alpha / battery_size; the significance flags in every embedded test
    /// use this level.
    pub corrected_alpha: f64,
    pub n_permutations: u32,
    pub counts: AnalysisCounts,
    pub rejection_rate: f64,
    pub by_proportion: Vec<ProportionCell>,
    /// Present only when the run includes the full text (proportion 1.0).
    pub headline: Option<HeadlineAnalysis>,
    pub fixed_effects: Option<FixedEffectsFit>,
    /// Windowed mean rank gap over retained length, pooled across
    /// proportions.
    pub moving_average_rank: Option<MovingAverageSeries>,
    pub moving_average_score: Option<MovingAverageSeries>,
    pub warnings: Vec<String>,
}

pub fn run_dir(config: &RunConfig, run_id: &str) -> PathBuf {
    config.output_dir.join("runs").join(run_id)
}

pub fn reports_dir(config: &RunConfig, run_id: &str) -> PathBuf {
    config.output_dir.join("reports").join(run_id)
}

fn compose_run_id(config_digest: &str, corpus_digest: &str, template_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_digest.as_bytes());
    hasher.update([0x1f]);
    hasher.update(corpus_digest.as_bytes());
    hasher.update([0x1f]);
    hasher.update(template_text.as_bytes());
    let digest = hex::encode(hasher.finalize());
    format!("run-{}", &digest[..12])
}

/// The run identifier this configuration will produce, computed without
/// scoring anything. Stable across machines.
pub fn derive_run_id(config: &RunConfig) -> Result<String, PipelineError> {
    let corpus = load_corpus(&config.corpus_path, config.corpus_format)?;
    let template = load_template(config)?;
    Ok(compose_run_id(
        &config.digest(),
        &corpus.digest(),
        &template.full_text(),
    ))
}

pub fn load_template(config: &RunConfig) -> Result<PromptTemplate, PipelineError> {
    match &config.prompt_template_path {
        Some(path) => Ok(PromptTemplate::from_file(path)?),
        None => Ok(PromptTemplate::default()),
    }
}

fn chunk_backend(config: &RunConfig) -> Result<Backend, PipelineError> {
    match config.chunker {
        BackendKind::Boundary => Ok(Backend::Boundary),
        BackendKind::Embedding => {
            let e = config
                .embedding
                .as_ref()
                .ok_or(ConfigError::MissingEmbedding)?;
            Ok(Backend::Embedding(Box::new(HttpEmbedder {
                endpoint_url: e.endpoint_url.clone(),
                model_id: e.model_id.clone(),
                credential_env_var: e.credential_env_var.clone(),
                timeout: Duration::from_secs(e.timeout_secs),
            })))
        }
    }
}

pub fn build_scoring_backend(config: &RunConfig) -> Result<ScoringBackend, PipelineError> {
    match &config.scorer {
        ScorerChoice::Synthetic { .. } => {
            let scorer_config = config
                .scorer
                .resolve_synthetic(config.seed)?
                .expect("synthetic choice resolves to a synthetic config");
            Ok(ScoringBackend::Synthetic(SyntheticScorer::new(scorer_config)))
        }
        ScorerChoice::Provider { config: provider } => Ok(ScoringBackend::Provider(
            ProviderClient::new(provider.clone())?,
        )),
    }
}

/// Load and validate the corpus; report its shape.
pub fn stage_ingest(config: &RunConfig) -> Result<CorpusSummary, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus_path, config.corpus_format)?;
    let mut per_industry = BTreeMap::new();
    for resume in corpus.resumes() {
        *per_industry.entry(resume.industry.to_string()).or_insert(0) += 1;
    }
    let words: Vec<usize> = corpus.resumes().iter().map(|r| r.word_count).collect();
    let total: usize = words.iter().sum();
    Ok(CorpusSummary {
        n_resumes: corpus.len(),
        per_industry,
        min_words: words.iter().copied().min().unwrap_or(0),
        max_words: words.iter().copied().max().unwrap_or(0),
        mean_words: total as f64 / corpus.len().max(1) as f64,
        digest: corpus.digest(),
    })
}

/// Split every resume into elements; report how finely they divide.
pub fn stage_chunk(config: &RunConfig) -> Result<ChunkSummary, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus_path, config.corpus_format)?;
    let backend = chunk_backend(config)?;
    let mut counts = Vec::with_capacity(corpus.len());
    for resume in corpus.resumes() {
        counts.push(chunker::chunk(resume, &backend)?.len());
    }
    let total: usize = counts.iter().sum();
    Ok(ChunkSummary {
        backend: config.chunker,
        n_resumes: counts.len(),
        total_elements: total,
        min_elements: counts.iter().copied().min().unwrap_or(0),
        max_elements: counts.iter().copied().max().unwrap_or(0),
        mean_elements: total as f64 / counts.len().max(1) as f64,
    })
}

/// Every scoring request for one run: each resume at each truncation level,
/// once per treatment arm, with identical retained text across arms.
pub fn build_requests(
    config: &RunConfig,
    corpus: &Corpus,
    template: &PromptTemplate,
    model_id: &str,
) -> Result<Vec<ScoreRequest>, PipelineError> {
    let backend = chunk_backend(config)?;
    let treatments = config.attribute.treatments();
    let mut requests =
        Vec::with_capacity(corpus.len() * config.proportions.len() * treatments.len());
    for resume in corpus.resumes() {
        let chunks: ChunkSet = chunker::chunk(resume, &backend)?;
        for &proportion in &config.proportions {
            let seed = chunker::truncation_seed(config.seed, &resume.id, proportion);
            let truncated: TruncatedResume = chunker::truncate(&chunks, proportion, seed)?;
            let variants =
                make_variants_from_text(&resume.id, &truncated.text, proportion, &config.attribute);
            for variant in variants {
                let prompt =
                    render(template, &resume.role, &variant.counterfactual_info, &variant.text)?;
                requests.push(ScoreRequest::new(
                    resume.id.as_str(),
                    variant.treatment,
                    proportion,
                    truncated.retained_words,
                    variant.text,
                    prompt,
                    model_id,
                ));
            }
        }
    }
    debug_assert_eq!(
        requests.len(),
        corpus.len() * config.proportions.len() * treatments.len()
    );
    Ok(requests)
}

/// Score every request, resuming any earlier partial progress in the same
/// run directory, then write the manifest. The manifest appears only after
/// every request is answered, so its presence marks a complete run.
pub fn stage_run(config: &RunConfig) -> Result<RunManifest, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus_path, config.corpus_format)?;
    let template = load_template(config)?;
    let model_id = config.scorer.model_id()?;
    let run_id = compose_run_id(&config.digest(), &corpus.digest(), &template.full_text());

    let requests = build_requests(config, &corpus, &template, &model_id)?;
    let backend = build_scoring_backend(config)?;
    let dir = run_dir(config, &run_id);
    let mut store = ScoreStore::open(&dir)?;
    let _progress: CollectionSummary = collect_scores(&requests, &backend, &mut store)?;

    // Totals come from the store so resumed runs count earlier progress.
    let scored = store.records().len();
    let rejected = store.rejections().len();
    if scored + rejected != requests.len() {
        return Err(PipelineError::ManifestMismatch {
            detail: format!(
                "store holds {} answers for {} requests; was the directory shared \
                 between different runs?",
                scored + rejected,
                requests.len()
            ),
        });
    }

    let manifest = RunManifest {
        run_id: run_id.clone(),
        config_digest: config.digest(),
        corpus_digest: corpus.digest(),
        attribute: config.attribute.clone(),
        proportions: config.proportions.clone(),
        seed: config.seed,
        model_id,
        scorer_kind: match &config.scorer {
            ScorerChoice::Synthetic { .. } => "synthetic".to_string(),
            ScorerChoice::Provider { .. } => "provider".to_string(),
        },
        chunker: config.chunker,
        n_resumes: corpus.len(),
        n_treatments: config.attribute.treatments().len(),
        counts: ManifestCounts {
            requests: requests.len(),
            scored,
            rejected,
        },
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Load the manifest and records of a completed run, verifying that the
/// stored artifacts are complete and still match the corpus on disk.
pub fn load_run(
    config: &RunConfig,
    run_id: &str,
) -> Result<(RunManifest, Vec<ScoreRecord>), PipelineError> {
    let dir = run_dir(config, run_id);
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(PipelineError::MissingRun {
            run_id: run_id.to_string(),
            dir,
        });
    }
    let manifest: RunManifest = read_json(&manifest_path)?;
    let store = ScoreStore::open(&dir)?;
    if store.records().len() != manifest.counts.scored
        || store.rejections().len() != manifest.counts.rejected
    {
        return Err(PipelineError::ManifestMismatch {
            detail: format!(
                "manifest promises {} scores and {} rejections, store holds {} and {}",
                manifest.counts.scored,
                manifest.counts.rejected,
                store.records().len(),
                store.rejections().len()
            ),
        });
    }
    Ok((manifest, store.records().to_vec()))
}

/// Run the statistical battery over a completed run's records and write the
/// analysis file next to them.
pub fn stage_analyze(config: &RunConfig, run_id: &str) -> Result<AnalysisOutput, PipelineError> {
    config.validate()?;
    let (manifest, records) = load_run(config, run_id)?;
    let corpus = load_corpus(&config.corpus_path, config.corpus_format)?;
    if corpus.digest() != manifest.corpus_digest {
        return Err(PipelineError::ManifestMismatch {
            detail: format!(
                "corpus at {} has changed since the run was scored",
                config.corpus_path.display()
            ),
        });
    }
    let analysis = analyze_records(config, &manifest, &records, &corpus)?;
    write_json(&run_dir(config, run_id).join(ANALYSIS_FILE), &analysis)?;
    Ok(analysis)
}

/// Read back the analysis file written by [`stage_analyze`].
pub fn load_analysis(config: &RunConfig, run_id: &str) -> Result<AnalysisOutput, PipelineError> {
    let path = run_dir(config, run_id).join(ANALYSIS_FILE);
    if !path.exists() {
        return Err(PipelineError::MissingRun {
            run_id: run_id.to_string(),
            dir: run_dir(config, run_id),
        });
    }
    read_json(&path)
}

/// One (resume, proportion) cell mid-assembly.
#[derive(Default)]
struct CellScores {
    first: Option<u8>,
    second: Option<u8>,
    neutral: Option<u8>,
    retained_words: usize,
}

/// A fully scored cell: ranks, raw scores, and provenance.
struct CompleteCell {
    resume_id: String,
    triple: RankTriple,
    score_first: u8,
    score_second: u8,
    score_neutral: u8,
    retained_words: usize,
}

/// Seed for one named test site, so every permutation test in a run draws
/// from its own reproducible stream.
fn site_seed(run_seed: u64, site: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(site.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Rank pairs in (second, first) group order, matching the permutation
/// API's (male, female) convention.
fn rank_pairs(cells: &[&CompleteCell]) -> Vec<(f64, f64)> {
    cells
        .iter()
        .map(|c| (c.triple.rank_male, c.triple.rank_female))
        .collect()
}

fn score_pairs(cells: &[&CompleteCell]) -> Vec<(f64, f64)> {
    cells
        .iter()
        .map(|c| (c.score_second as f64, c.score_first as f64))
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n.max(1) as f64
}

/// The full statistical battery over a run's records. Pure: reads nothing
/// from disk and uses only config-derived seeds, so identical inputs give
/// identical output.
pub fn analyze_records(
    config: &RunConfig,
    manifest: &RunManifest,
    records: &[ScoreRecord],
    corpus: &Corpus,
) -> Result<AnalysisOutput, PipelineError> {
    let values = &manifest.attribute.values;
    if values.len() != 2 || !manifest.attribute.include_neutral {
        return Err(PipelineError::UnsupportedDesign {
            detail: format!(
                "{} value(s), neutral arm {}",
                values.len(),
                if manifest.attribute.include_neutral {
                    "present"
                } else {
                    "absent"
                }
            ),
        });
    }
    let first = values[0].clone();
    let second = values[1].clone();
    let corrected_alpha = config.alpha / config.battery_size as f64;
    let b = config.n_permutations;
    let mut warnings = Vec::new();

    let industry_of: BTreeMap<&str, &Industry> = corpus
        .resumes()
        .iter()
        .map(|r| (r.id.as_str(), &r.industry))
        .collect();

    // Regroup the flat record stream into (proportion, resume) cells. The
    // f64 bit pattern is an exact, order-preserving key for the positive
    // proportions.
    let mut cells: BTreeMap<u64, BTreeMap<String, CellScores>> = BTreeMap::new();
    let mut unknown_treatments = 0usize;
    for record in records {
        let slot = cells
            .entry(record.proportion.to_bits())
            .or_default()
            .entry(record.resume_id.clone())
            .or_default();
        slot.retained_words = record.retained_words;
        let label = record.treatment.label();
        if label == first {
            slot.first = Some(record.score);
        } else if label == second {
            slot.second = Some(record.score);
        } else if record.treatment.is_neutral() {
            slot.neutral = Some(record.score);
        } else {
            unknown_treatments += 1;
        }
    }
    if unknown_treatments > 0 {
        warnings.push(format!(
            "{unknown_treatments} record(s) carry treatments outside the attribute \
             specification and were ignored"
        ));
    }

    // Keep only fully scored cells; every dropped cell is reported.
    let mut complete: BTreeMap<u64, Vec<CompleteCell>> = BTreeMap::new();
    let mut excluded = 0usize;
    let mut excluded_examples: Vec<String> = Vec::new();
    for (&bits, resumes) in &cells {
        let proportion = f64::from_bits(bits);
        let bucket = complete.entry(bits).or_default();
        for (resume_id, cell) in resumes {
            match (cell.first, cell.second, cell.neutral) {
                (Some(f), Some(m), Some(n)) => bucket.push(CompleteCell {
                    resume_id: resume_id.clone(),
                    triple: make_rank_triple(f, m, n, resume_id, proportion),
                    score_first: f,
                    score_second: m,
                    score_neutral: n,
                    retained_words: cell.retained_words,
                }),
                _ => {
                    excluded += 1;
                    if excluded_examples.len() < 5 {
                        excluded_examples.push(format!("{resume_id}@{proportion}"));
                    }
                }
            }
        }
    }
    if excluded > 0 {
        warnings.push(format!(
            "{excluded} (resume, proportion) cell(s) lack at least one treatment \
             arm and were excluded (e.g. {})",
            excluded_examples.join(", ")
        ));
    }
    let complete_cells: usize = complete.values().map(Vec::len).sum();

    // Pooled location/dispersion tests at every truncation level.
    let mut by_proportion = Vec::new();
    for &proportion in &manifest.proportions {
        let bucket: Vec<&CompleteCell> = complete
            .get(&proportion.to_bits())
            .map(|v| v.iter().collect())
            .unwrap_or_default();
        let n = bucket.len();
        let mean_rank_gap = mean(bucket.iter().map(|c| c.triple.rank_gap));
        let mean_score_gap = mean(
            bucket
                .iter()
                .map(|c| c.score_second as f64 - c.score_first as f64),
        );
        let (rank_level, rank_spread) = if n >= 2 {
            let pairs = rank_pairs(&bucket);
            (
                Some(
                    perm_test_level(&pairs, b, site_seed(config.seed, &format!("rank-level/pooled/{proportion}")))?
                        .at_level(corrected_alpha),
                ),
                Some(
                    perm_test_spread(&pairs, b, site_seed(config.seed, &format!("rank-spread/pooled/{proportion}")))?
                        .at_level(corrected_alpha),
                ),
            )
        } else {
            warnings.push(format!(
                "proportion {proportion}: only {n} complete cell(s); pooled tests skipped"
            ));
            (None, None)
        };
        by_proportion.push(ProportionCell {
            proportion,
            n,
            mean_rank_gap,
            mean_score_gap,
            rank_level,
            rank_spread,
        });
    }

    // The headline battery runs on full resumes only.
    let full_bucket: Option<&Vec<CompleteCell>> = complete.get(&1.0f64.to_bits());
    let headline = match full_bucket {
        None => {
            warnings.push(
                "run lacks proportion 1.0; headline industry tests skipped".to_string(),
            );
            None
        }
        Some(bucket) => Some(build_headline(
            config,
            bucket,
            &industry_of,
            corrected_alpha,
            &mut warnings,
        )?),
    };

    // Panel across proportions: rank gap against logged retained length.
    let panel: Vec<PanelRow> = complete
        .values()
        .flatten()
        .map(|c| PanelRow {
            resume_id: c.resume_id.clone(),
            proportion: c.triple.proportion,
            gap: c.triple.rank_gap,
            retained_words: c.retained_words,
        })
        .collect();
    let fixed_effects = match fit_fixed_effects(&panel) {
        Ok(fit) => Some(fit),
        Err(e) => {
            warnings.push(format!("fixed-effects panel not estimable: {e}"));
            None
        }
    };

    let rank_series: Vec<(usize, f64)> =
        panel.iter().map(|r| (r.retained_words, r.gap)).collect();
    let moving_average_rank = match moving_average_gap(&rank_series, config.window) {
        Ok(series) => {
            if series.truncated {
                warnings.push(format!(
                    "moving-average window {} exceeds the {} observations; emitted a \
                     single truncated point",
                    config.window,
                    rank_series.len()
                ));
            }
            Some(series)
        }
        Err(e) => {
            warnings.push(format!("rank moving average not computable: {e}"));
            None
        }
    };
    let score_series: Vec<(usize, f64)> = complete
        .values()
        .flatten()
        .map(|c| {
            (
                c.retained_words,
                c.score_second as f64 - c.score_first as f64,
            )
        })
        .collect();
    let moving_average_score = match moving_average_gap(&score_series, config.window) {
        Ok(series) => Some(series),
        Err(e) => {
            warnings.push(format!("score moving average not computable: {e}"));
            None
        }
    };

    let rejection_rate = manifest.counts.rejected as f64 / manifest.counts.requests.max(1) as f64;
    Ok(AnalysisOutput {
        run_id: manifest.run_id.clone(),
        model_id: manifest.model_id.clone(),
        seed: config.seed,
        n_resumes: manifest.n_resumes,
        proportions: manifest.proportions.clone(),
        attribute_values: [first, second],
        alpha: config.alpha,
        battery_size: config.battery_size,
        corrected_alpha,
        n_permutations: b,
        counts: AnalysisCounts {
            expected_requests: manifest.counts.requests,
            scored: manifest.counts.scored,
            rejected: manifest.counts.rejected,
            complete_cells,
            excluded_cells: excluded,
        },
        rejection_rate,
        by_proportion,
        headline,
        fixed_effects,
        moving_average_rank,
        moving_average_score,
        warnings,
    })
}

fn build_headline(
    config: &RunConfig,
    bucket: &[CompleteCell],
    industry_of: &BTreeMap<&str, &Industry>,
    corrected_alpha: f64,
    warnings: &mut Vec<String>,
) -> Result<HeadlineAnalysis, PipelineError> {
    let b = config.n_permutations;

    let mut by_industry: BTreeMap<Industry, Vec<&CompleteCell>> = BTreeMap::new();
    let mut orphans = 0usize;
    for cell in bucket {
        match industry_of.get(cell.resume_id.as_str()) {
            Some(&industry) => by_industry
                .entry(industry.clone())
                .or_default()
                .push(cell),
            None => orphans += 1,
        }
    }
    if orphans > 0 {
        warnings.push(format!(
            "{orphans} scored resume(s) are absent from the corpus and were left out \
             of the industry tables"
        ));
    }

    let mut per_industry = Vec::new();
    for (industry, cells) in &by_industry {
        let name = industry.to_string();
        let n = cells.len();
        let mean_rank_neutral = mean(cells.iter().map(|c| c.triple.rank_neutral));
        let mean_rank_male = mean(cells.iter().map(|c| c.triple.rank_male));
        let mean_rank_female = mean(cells.iter().map(|c| c.triple.rank_female));
        let mean_score_neutral = mean(cells.iter().map(|c| c.score_neutral as f64));
        let mean_score_male = mean(cells.iter().map(|c| c.score_second as f64));
        let mean_score_female = mean(cells.iter().map(|c| c.score_first as f64));
        let (rank_level, rank_spread, score_level, score_spread) = if n >= 2 {
            let ranks = rank_pairs(cells);
            let scores = score_pairs(cells);
            let score_diffs: Vec<f64> = scores.iter().map(|(m, f)| m - f).collect();
            (
                Some(
                    perm_test_level(&ranks, b, site_seed(config.seed, &format!("rank-level/{name}")))?
                        .at_level(corrected_alpha),
                ),
                Some(
                    perm_test_spread(&ranks, b, site_seed(config.seed, &format!("rank-spread/{name}")))?
                        .at_level(corrected_alpha),
                ),
                Some(paired_t_test(&score_diffs)?.at_level(corrected_alpha)),
                Some(
                    perm_test_spread(&scores, b, site_seed(config.seed, &format!("score-spread/{name}")))?
                        .at_level(corrected_alpha),
                ),
            )
        } else {
            warnings.push(format!(
                "industry {name}: only {n} complete cell(s) at proportion 1.0; tests \
                 skipped"
            ));
            (None, None, None, None)
        };
        per_industry.push(IndustryCell {
            industry: name,
            n,
            mean_rank_neutral,
            mean_rank_male,
            mean_rank_female,
            rank_level,
            rank_spread,
            mean_score_neutral,
            mean_score_male,
            mean_score_female,
            score_level,
            score_spread,
        });
    }

    // Industry regression covers the three canonical sectors; anything else
    // is dropped from this one fit with a warning.
    let mut industry_rows: Vec<(f64, Industry)> = Vec::new();
    let mut dropped_other = 0usize;
    for cell in bucket {
        match industry_of.get(cell.resume_id.as_str()) {
            Some(Industry::Other(_)) => dropped_other += 1,
            Some(&industry) => industry_rows.push((cell.triple.rank_gap, industry.clone())),
            None => {}
        }
    }
    if dropped_other > 0 {
        warnings.push(format!(
            "{dropped_other} observation(s) in non-canonical industries were excluded \
             from the industry regression"
        ));
    }
    let industry_fit = match fit_industry(&industry_rows) {
        Ok(fit) => Some(fit),
        Err(e) => {
            warnings.push(format!("industry regression not estimable: {e}"));
            None
        }
    };

    let all_cells: Vec<&CompleteCell> = bucket.iter().collect();
    let impact_ras = match impact_ratio_ras(&rank_pairs(&all_cells)) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("rank-based impact ratio not computable: {e}"));
            None
        }
    };
    let score_male: Vec<f64> = bucket.iter().map(|c| c.score_second as f64).collect();
    let score_female: Vec<f64> = bucket.iter().map(|c| c.score_first as f64).collect();
    let impact_score = match impact_ratio_score_mean_cutoff(&score_male, &score_female) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("score-based impact ratio not computable: {e}"));
            None
        }
    };

    let triples: Vec<&RankTriple> = bucket.iter().map(|c| &c.triple).collect();
    let frequencies = case_frequencies(triples.iter().copied());
    let case_rows = BiasCase::ALL
        .iter()
        .map(|&case| CaseFrequency {
            case: case.as_str().to_string(),
            count: frequencies[&case],
            favored: if case.female_preferred() {
                "female"
            } else if case.male_preferred() {
                "male"
            } else {
                "none"
            }
            .to_string(),
        })
        .collect();

    Ok(HeadlineAnalysis {
        per_industry,
        industry_fit,
        impact_ras,
        impact_score,
        case_frequencies: case_rows,
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut body = serde_json::to_string_pretty(value).map_err(|e| PipelineError::Json {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    body.push('\n');
    fs::write(path, body).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let raw = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&raw).map_err(|e| PipelineError::Json {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}
