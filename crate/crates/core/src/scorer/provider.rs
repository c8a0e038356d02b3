//! Remote scoring over HTTP with retries and bounded concurrency.
//!
//! Two wire formats are supported, chosen by provider name: names starting
//! with `anthropic` use the messages API shape, everything else uses the
//! chat-completions shape. Requests that fail with a rate limit, a server
//! error, or a timeout are retried with exponential backoff; refusals and
//! unparseable answers are recorded as rejections, not retried.

use std::time::Duration;

use futures::StreamExt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::persist::ScoreStore;
use super::{RejectionRecord, ScoreOutcome, ScoreRecord, ScoreRequest, ScorerError};
use crate::prompt::{parse_response, PromptError};

const BACKOFF_BASE_MS: u64 = 500;
const BACKOFF_CAP_MS: u64 = 8_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Provider family name; decides the request shape.
    pub name: String,
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API credential. The
    /// credential itself never appears in configuration files.
    pub credential_env_var: String,
    /// Sampling temperature sent with every request; zero keeps repeated
    /// runs comparable.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

fn default_max_concurrency() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ApiFlavor {
    /// Messages API: `content` blocks in, `content` blocks out.
    Messages,
    /// Chat-completions API: `choices[0].message.content` out.
    Chat,
}

pub(crate) fn flavor_for(provider_name: &str) -> ApiFlavor {
    if provider_name.trim().to_ascii_lowercase().starts_with("anthropic") {
        ApiFlavor::Messages
    } else {
        ApiFlavor::Chat
    }
}

pub struct ProviderClient {
    config: ProviderConfig,
    flavor: ApiFlavor,
    credential: String,
    http: reqwest::Client,
}

impl ProviderClient {
    pub fn new(config: ProviderConfig) -> Result<Self, ScorerError> {
        let credential = std::env::var(&config.credential_env_var)
            .ok()
            .filter(|v| !v.trim().is_empty())
            .ok_or_else(|| ScorerError::MissingCredential {
                var: config.credential_env_var.clone(),
            })?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ScorerError::Transport {
                detail: e.to_string(),
            })?;
        let flavor = flavor_for(&config.name);
        Ok(ProviderClient {
            config,
            flavor,
            credential,
            http,
        })
    }

    pub fn concurrency(&self) -> usize {
        self.config.max_concurrency.max(1)
    }

    pub fn model_id(&self) -> &str {
        &self.config.model_id
    }

    /// Issue one scoring request, retrying transient failures. Returns a
    /// rejection outcome when the model answers but refuses or returns an
    /// unusable score.
    pub(crate) async fn score_one(&self, request: &ScoreRequest) -> Result<ScoreOutcome, ScorerError> {
        let body = request_body(
            self.flavor,
            &self.config.model_id,
            &request.prompt,
            self.config.temperature,
        );
        let mut last_failure = String::new();
        let attempts = self.config.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                tokio::time::sleep(backoff_delay(attempt - 1)).await;
            }
            let send = self.authorized(self.http.post(&self.config.endpoint_url).json(&body));
            match send.send().await {
                Err(e) => {
                    // Connection and timeout problems are worth retrying.
                    last_failure = format!("transport: {e}");
                }
                Ok(response) => {
                    let status = response.status().as_u16();
                    let text = response.text().await.unwrap_or_default();
                    if (200..300).contains(&status) {
                        return self.interpret(request, &text);
                    }
                    if retryable_status(status) {
                        last_failure = format!("HTTP {status}: {}", snippet(&text));
                    } else {
                        return Err(ScorerError::Http {
                            status,
                            detail: snippet(&text),
                        });
                    }
                }
            }
        }
        Err(ScorerError::Exhausted {
            attempts,
            last: last_failure,
        })
    }

    fn authorized(&self, builder: reqwest::RequestBuilder) -> reqwest::RequestBuilder {
        match self.flavor {
            ApiFlavor::Messages => builder
                .header("x-api-key", &self.credential)
                .header("anthropic-version", "2023-06-01"),
            ApiFlavor::Chat => builder.bearer_auth(&self.credential),
        }
    }

    /// Turn a successful HTTP body into a score or a rejection record.
    fn interpret(&self, request: &ScoreRequest, body: &str) -> Result<ScoreOutcome, ScorerError> {
        let value: Value = serde_json::from_str(body).map_err(|e| ScorerError::BadPayload {
            detail: format!("response is not JSON: {e}"),
        })?;
        let answer = extract_text(self.flavor, &value)?;
        match parse_response(&answer) {
            Ok(parsed) => Ok(ScoreOutcome::Scored(ScoreRecord {
                resume_id: request.resume_id.clone(),
                treatment: request.treatment.clone(),
                proportion: request.proportion,
                score: parsed.score,
                overview: parsed.overview,
                model_id: self.config.model_id.clone(),
                retained_words: request.retained_words,
                request_fingerprint: request.fingerprint.clone(),
                timestamp: super::now_timestamp(),
            })),
            Err(PromptError::Rejection { reason, raw }) => {
                Ok(ScoreOutcome::Rejected(self.rejection(request, reason, raw)))
            }
            Err(PromptError::ScoreOutOfRange { score, raw }) => Ok(ScoreOutcome::Rejected(
                self.rejection(request, format!("score {score} outside 0..=10"), raw),
            )),
            Err(other) => Err(ScorerError::BadPayload {
                detail: other.to_string(),
            }),
        }
    }

    fn rejection(&self, request: &ScoreRequest, reason: String, raw: String) -> RejectionRecord {
        RejectionRecord {
            resume_id: request.resume_id.clone(),
            treatment: request.treatment.clone(),
            proportion: request.proportion,
            model_id: self.config.model_id.clone(),
            reason,
            raw,
            request_fingerprint: request.fingerprint.clone(),
        }
    }
}

/// Drive a set of requests to completion with bounded concurrency, flushing
/// each answer to the store as it lands. The first hard error aborts the
/// batch; everything already stored stays stored.
pub(crate) fn run_batch(
    client: &ProviderClient,
    pending: Vec<ScoreRequest>,
    store: &mut ScoreStore,
) -> Result<(usize, usize), ScorerError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| ScorerError::Transport {
            detail: format!("async runtime: {e}"),
        })?;
    runtime.block_on(async {
        let mut in_flight = futures::stream::iter(
            pending.iter().map(|request| client.score_one(request)),
        )
        .buffer_unordered(client.concurrency());
        let mut scored = 0usize;
        let mut rejected = 0usize;
        while let Some(outcome) = in_flight.next().await {
            match outcome? {
                ScoreOutcome::Scored(record) => {
                    store.append_score(record)?;
                    scored += 1;
                }
                ScoreOutcome::Rejected(rejection) => {
                    store.append_rejection(rejection)?;
                    rejected += 1;
                }
            }
        }
        Ok((scored, rejected))
    })
}

fn request_body(flavor: ApiFlavor, model_id: &str, prompt: &str, temperature: f64) -> Value {
    match flavor {
        ApiFlavor::Messages => json!({
            "model": model_id,
            "max_tokens": 1024,
            "temperature": temperature,
            "messages": [{"role": "user", "content": prompt}],
        }),
        ApiFlavor::Chat => json!({
            "model": model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }),
    }
}

fn extract_text(flavor: ApiFlavor, value: &Value) -> Result<String, ScorerError> {
    let missing = |what: &str| ScorerError::BadPayload {
        detail: format!("response has no {what}"),
    };
    match flavor {
        ApiFlavor::Messages => {
            let blocks = value
                .get("content")
                .and_then(Value::as_array)
                .ok_or_else(|| missing("content array"))?;
            let text: String = blocks
                .iter()
                .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
                .filter_map(|b| b.get("text").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join("");
            if text.is_empty() {
                return Err(missing("text content block"));
            }
            Ok(text)
        }
        ApiFlavor::Chat => value
            .get("choices")
            .and_then(Value::as_array)
            .and_then(|c| c.first())
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content"))
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| missing("choices[0].message.content")),
    }
}

fn retryable_status(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn backoff_delay(retry_index: u32) -> Duration {
    let ms = BACKOFF_BASE_MS
        .saturating_mul(1u64 << retry_index.min(10))
        .min(BACKOFF_CAP_MS);
    Duration::from_millis(ms)
}

fn snippet(body: &str) -> String {
    let trimmed = body.trim();
    if trimmed.len() <= 200 {
        trimmed.to_string()
    } else {
        let mut cut = 200;
        while !trimmed.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}...", &trimmed[..cut])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_name_picks_the_wire_format() {
        assert_eq!(flavor_for("anthropic"), ApiFlavor::Messages);
        assert_eq!(flavor_for("Anthropic-Proxy"), ApiFlavor::Messages);
        assert_eq!(flavor_for("  anthropic_gateway"), ApiFlavor::Messages);
        assert_eq!(flavor_for("openai"), ApiFlavor::Chat);
        assert_eq!(flavor_for("local-vllm"), ApiFlavor::Chat);
        assert_eq!(flavor_for(""), ApiFlavor::Chat);
    }

    #[test]
    fn request_bodies_have_the_expected_shape() {
        let m = request_body(ApiFlavor::Messages, "model-a", "rate this", 0.0);
        assert_eq!(m["model"], "model-a");
        assert_eq!(m["max_tokens"], 1024);
        assert_eq!(m["temperature"], 0.0);
        assert_eq!(m["messages"][0]["role"], "user");
        assert_eq!(m["messages"][0]["content"], "rate this");

        let c = request_body(ApiFlavor::Chat, "model-b", "rate this", 0.7);
        assert_eq!(c["model"], "model-b");
        assert_eq!(c["messages"][0]["content"], "rate this");
        assert_eq!(c["temperature"], 0.7);
        assert!(c.get("max_tokens").is_none());
    }

    #[test]
    fn extracts_text_from_both_formats() {
        let messages = json!({
            "content": [
                {"type": "text", "text": "{'Score': 8, "},
                {"type": "tool_use", "id": "x"},
                {"type": "text", "text": "'Overview': 'fine'}"},
            ]
        });
        assert_eq!(
            extract_text(ApiFlavor::Messages, &messages).unwrap(),
            "{'Score': 8, 'Overview': 'fine'}"
        );

        let chat = json!({
            "choices": [{"message": {"role": "assistant", "content": "{'Score': 5}"}}]
        });
        assert_eq!(extract_text(ApiFlavor::Chat, &chat).unwrap(), "{'Score': 5}");
    }

    #[test]
    fn malformed_payloads_name_the_missing_piece() {
        let err = extract_text(ApiFlavor::Messages, &json!({"content": []})).unwrap_err();
        assert!(err.to_string().contains("text content block"), "{err}");
        let err = extract_text(ApiFlavor::Chat, &json!({"choices": []})).unwrap_err();
        assert!(err.to_string().contains("choices[0]"), "{err}");
    }

    #[test]
    fn retry_classification_and_backoff() {
        assert!(retryable_status(429));
        assert!(retryable_status(500));
        assert!(retryable_status(503));
        assert!(!retryable_status(400));
        assert!(!retryable_status(401));
        assert!(!retryable_status(404));

        assert_eq!(backoff_delay(0), Duration::from_millis(500));
        assert_eq!(backoff_delay(1), Duration::from_millis(1000));
        assert_eq!(backoff_delay(2), Duration::from_millis(2000));
        // The schedule is capped rather than unbounded.
        assert_eq!(backoff_delay(30), Duration::from_millis(8000));
    }

    #[test]
    fn missing_credential_is_detected_up_front() {
        let config = ProviderConfig {
            name: "openai".to_string(),
            endpoint_url: "http://127.0.0.1:1/v1/chat/completions".to_string(),
            model_id: "m".to_string(),
            credential_env_var: "SCREENAUDIT_TEST_ABSENT_CREDENTIAL".to_string(),
            temperature: 0.0,
            timeout_secs: 1,
            max_retries: 0,
            max_concurrency: 1,
        };
        std::env::remove_var("SCREENAUDIT_TEST_ABSENT_CREDENTIAL");
        match ProviderClient::new(config) {
            Err(ScorerError::MissingCredential { var }) => {
                assert_eq!(var, "SCREENAUDIT_TEST_ABSENT_CREDENTIAL");
            }
            other => panic!("expected missing credential, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn config_defaults_fill_optional_fields() {
        let parsed: ProviderConfig = serde_json::from_value(json!({
            "name": "openai",
            "endpoint_url": "https://example.invalid/v1",
            "model_id": "m",
            "credential_env_var": "KEY",
        }))
        .unwrap();
        assert_eq!(parsed.temperature, 0.0);
        assert_eq!(parsed.timeout_secs, 60);
        assert_eq!(parsed.max_retries, 3);
        assert_eq!(parsed.max_concurrency, 8);
    }

    #[test]
    fn long_error_bodies_are_truncated_safely() {
        let long = "é".repeat(300);
        let s = snippet(&long);
        assert!(s.ends_with("..."));
        assert!(s.len() <= 204);
    }
}
