//! Run configuration: one TOML file describes a complete audit run.
//!
//! Credentials never appear here. Anything that talks to a remote service
//! names an environment variable instead, and the secret is read from the
//! process environment at call time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chunker::BackendKind;
use crate::corpus::CorpusFormat;
use crate::counterfactual::{AttributeSpec, CounterfactualError};
use crate::scorer::{ProviderConfig, SyntheticScorerConfig};

pub const MIN_PERMUTATIONS: u32 = 1000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("proportions {detail}")]
    InvalidProportions { detail: String },
    #[error("n_permutations {value} is below the minimum {minimum}")]
    InvalidPermutations { value: u32, minimum: u32 },
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("window must be positive")]
    InvalidWindow,
    #[error("battery_size must be positive")]
    InvalidBattery,
    #[error("unknown synthetic preset `{0}`")]
    UnknownPreset(String),
    #[error("max_concurrency must be at least 1")]
    InvalidConcurrency,
    #[error("chunker `embedding` needs an [embedding] section")]
    MissingEmbedding,
    #[error(transparent)]
    Attribute(#[from] CounterfactualError),
}

/// Remote sentence-embedding endpoint for the embedding chunker backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Environment variable holding the credential, if the endpoint needs
    /// one.
    #[serde(default)]
    pub credential_env_var: Option<String>,
    #[serde(default = "default_embedding_timeout")]
    pub timeout_secs: u64,
}

fn default_embedding_timeout() -> u64 {
    30
}

/// Which scorer answers the prepared requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScorerChoice {
    /// Deterministic scorer with planted effects, selected by preset name
    /// with optional field overrides.
    Synthetic {
        preset: String,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        target: Option<String>,
        #[serde(default)]
        taste_delta: Option<f64>,
        #[serde(default)]
        trend_coeff: Option<f64>,
        #[serde(default)]
        noise_sd: Option<f64>,
        #[serde(default)]
        target_noise_sd: Option<f64>,
        #[serde(default)]
        model_id: Option<String>,
    },
    /// Remote model behind an HTTP API.
    Provider {
        #[serde(flatten)]
        config: ProviderConfig,
    },
}

impl ScorerChoice {
    pub fn synthetic_preset(preset: &str) -> Self {
        ScorerChoice::Synthetic {
            preset: preset.to_string(),
            seed: None,
            target: None,
            taste_delta: None,
            trend_coeff: None,
            noise_sd: None,
            target_noise_sd: None,
            model_id: None,
        }
    }

    /// The model identifier records will carry.
    pub fn model_id(&self) -> Result<String, ConfigError> {
        match self {
            ScorerChoice::Synthetic { preset, model_id, .. } => {
                let base = SyntheticScorerConfig::preset(preset, 0)
                    .ok_or_else(|| ConfigError::UnknownPreset(preset.clone()))?;
                Ok(model_id.clone().unwrap_or(base.model_id))
            }
            ScorerChoice::Provider { config } => Ok(config.model_id.clone()),
        }
    }

    /// Resolve a synthetic choice into a concrete scorer configuration,
    /// defaulting the noise seed to the run seed.
    pub fn resolve_synthetic(
        &self,
        run_seed: u64,
    ) -> Result<Option<SyntheticScorerConfig>, ConfigError> {
        let ScorerChoice::Synthetic {
            preset,
            seed,
            target,
            taste_delta,
            trend_coeff,
            noise_sd,
            target_noise_sd,
            model_id,
        } = self
        else {
            return Ok(None);
        };
        let mut config = SyntheticScorerConfig::preset(preset, seed.unwrap_or(run_seed))
            .ok_or_else(|| ConfigError::UnknownPreset(preset.clone()))?;
        if let Some(target) = target {
            config.target = target.clone();
        }
        if let Some(delta) = taste_delta {
            config.taste_delta = *delta;
        }
        if let Some(coeff) = trend_coeff {
            config.trend_coeff = *coeff;
        }
        if let Some(sd) = noise_sd {
            config.noise_sd = *sd;
        }
        if let Some(sd) = target_noise_sd {
            config.target_noise_sd = Some(*sd);
        }
        if let Some(model_id) = model_id {
            config.model_id = model_id.clone();
        }
        Ok(Some(config))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    #[serde(default)]
    pub corpus_format: CorpusFormat,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_proportions")]
    pub proportions: Vec<f64>,
    /// Moving-average window, in observations.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_permutations")]
    pub n_permutations: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Number of simultaneous tests charged by the familywise correction.
    #[serde(default = "default_battery_size")]
    pub battery_size: usize,
    #[serde(default)]
    pub chunker: BackendKind,
    #[serde(default)]
    pub embedding: Option<EmbeddingConfig>,
    #[serde(default = "AttributeSpec::gender")]
    pub attribute: AttributeSpec,
    /// Custom prompt template file; the built-in template when absent.
    #[serde(default)]
    pub prompt_template_path: Option<PathBuf>,
    pub scorer: ScorerChoice,
}

fn default_proportions() -> Vec<f64> {
    vec![0.1, 0.4, 0.6, 1.0]
}

fn default_window() -> usize {
    600
}

fn default_permutations() -> u32 {
    100_000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_battery_size() -> usize {
    100
}

impl RunConfig {
    /// A configuration with every tunable at its default.
    pub fn new(
        corpus_path: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        scorer: ScorerChoice,
    ) -> Self {
        RunConfig {
            corpus_path: corpus_path.into(),
            corpus_format: CorpusFormat::default(),
            output_dir: output_dir.into(),
            seed: 0,
            proportions: default_proportions(),
            window: default_window(),
            n_permutations: default_permutations(),
            alpha: default_alpha(),
            battery_size: default_battery_size(),
            chunker: BackendKind::default(),
            embedding: None,
            attribute: AttributeSpec::gender(),
            prompt_template_path: None,
            scorer,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.proportions.is_empty() {
            return Err(ConfigError::InvalidProportions {
                detail: "list is empty".to_string(),
            });
        }
        for &p in &self.proportions {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ConfigError::InvalidProportions {
                    detail: format!("{p} outside (0, 1]"),
                });
            }
        }
        for pair in self.proportions.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ConfigError::InvalidProportions {
                    detail: format!("must be strictly increasing, got {} then {}", pair[0], pair[1]),
                });
            }
        }
        if *self.proportions.last().expect("nonempty") != 1.0 {
            return Err(ConfigError::InvalidProportions {
                detail: "must include the full text (1.0)".to_string(),
            });
        }
        if self.n_permutations < MIN_PERMUTATIONS {
            return Err(ConfigError::InvalidPermutations {
                value: self.n_permutations,
                minimum: MIN_PERMUTATIONS,
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::InvalidAlpha(self.alpha));
        }
        if self.window == 0 {
            return Err(ConfigError::InvalidWindow);
        }
        if self.battery_size == 0 {
            return Err(ConfigError::InvalidBattery);
        }
        if self.chunker == BackendKind::Embedding && self.embedding.is_none() {
            return Err(ConfigError::MissingEmbedding);
        }
        if let ScorerChoice::Provider { config } = &self.scorer {
            if config.max_concurrency == 0 {
                return Err(ConfigError::InvalidConcurrency);
            }
        }
        // Surface preset typos and attribute problems before any work runs.
        self.scorer.model_id()?;
        AttributeSpec::new(
            self.attribute.attribute_name.clone(),
            self.attribute.values.clone(),
            self.attribute.include_neutral,
        )?;
        Ok(())
    }

    /// Stable digest of the full configuration, used to derive run
    /// identifiers.
    pub fn digest(&self) -> String {
        let canonical =
            serde_json::to_string(self).expect("configuration serializes infallibly");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: RunConfig = toml::from_str(&raw).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}
