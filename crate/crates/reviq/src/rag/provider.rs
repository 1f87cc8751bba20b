//! Embedding and language-model providers.
//!
//! Production providers speak a small JSON contract over HTTP; tests and
//! offline runs use deterministic local doubles (a hashing embedder and a
//! scripted model).

use super::pipeline::QaRequest;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider {provider} returned status {status}: {body}")]
    Http { provider: String, status: u16, body: String },
    #[error("provider {provider} network failure: {message}")]
    Network { provider: String, message: String, retryable: bool },
    #[error("no scripted response for query {0}")]
    NoScript(String),
    #[error("embedding produced a zero vector for segment {segment}")]
    ZeroVector { segment: usize },
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("segment {segment}: {source}")]
    AtSegment { segment: usize, source: Box<ProviderError> },
}

impl ProviderError {
    /// Whether a retry could plausibly succeed.
    pub fn retryable(&self) -> bool {
        match self {
            ProviderError::Network { retryable, .. } => *retryable,
            ProviderError::Http { status, .. } => *status >= 500 || *status == 429,
            ProviderError::AtSegment { source, .. } => source.retryable(),
            _ => false,
        }
    }
}

/// Text-to-vector provider. All vectors from one provider share a
/// dimension.
pub trait Embedder: Sync {
    fn id(&self) -> &str;
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Text-completion provider.
pub trait LlmProvider: Sync {
    fn id(&self) -> &str;
    fn complete(&self, request: &QaRequest) -> Result<String, ProviderError>;
}

// ---------------------------------------------------------------------------
// Deterministic doubles
// ---------------------------------------------------------------------------

/// Feature-hashing bag-of-tokens embedder. Deterministic across runs and
/// platforms: token -> sha256 -> (bucket, sign).
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dim: 256 }
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        "hash-embedder"
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut v = vec![0.0f64; self.dim];
        for token in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
        {
            let digest = Sha256::digest(token.as_bytes());
            let bucket = u64::from_le_bytes(digest[0..8].try_into().unwrap()) as usize % self.dim;
            let sign = if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[bucket] += sign;
        }
        Ok(v)
    }
}

/// Scripted model keyed by query id, with an optional fallback response.
#[derive(Debug, Clone, Default)]
pub struct ScriptedLlm {
    pub responses: BTreeMap<String, String>,
    pub fallback: Option<String>,
}

impl ScriptedLlm {
    pub fn new(responses: BTreeMap<String, String>) -> Self {
        ScriptedLlm { responses, fallback: None }
    }
}

impl LlmProvider for ScriptedLlm {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &QaRequest) -> Result<String, ProviderError> {
        let key = request.query_id.clone().unwrap_or_default();
        if let Some(r) = self.responses.get(&key) {
            return Ok(r.clone());
        }
        match &self.fallback {
            Some(r) => Ok(r.clone()),
            None => Err(ProviderError::NoScript(key)),
        }
    }
}

// ---------------------------------------------------------------------------
// HTTP providers
// ---------------------------------------------------------------------------

/// Connection settings shared by the HTTP providers. `timeout_secs` and
/// `retries` may be overridden by the environment variables
/// `REVIQ_PROVIDER_TIMEOUT_SECS` and `REVIQ_PROVIDER_RETRIES`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    2
}

impl HttpProviderConfig {
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(t) = std::env::var("REVIQ_PROVIDER_TIMEOUT_SECS") {
            if let Ok(t) = t.parse() {
                self.timeout_secs = t;
            }
        }
        if let Ok(r) = std::env::var("REVIQ_PROVIDER_RETRIES") {
            if let Ok(r) = r.parse() {
                self.retries = r;
            }
        }
        self
    }
}

#[derive(Serialize)]
struct EmbedRequestBody<'a> {
    model: &'a str,
    input: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponseBody {
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CompleteRequestBody<'a> {
    model: &'a str,
    system: &'a str,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompleteResponseBody {
    text: String,
}

/// Embedding endpoint: POST {model, input: [text]} -> {vectors: [[f64]]}.
pub struct HttpEmbedder {
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(config: HttpProviderConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .expect("client construction");
        HttpEmbedder { config, client }
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> &str {
        &self.config.model
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let body = EmbedRequestBody { model: &self.config.model, input: vec![text] };
        let resp: EmbedResponseBody =
            post_with_retries(&self.client, &self.config, &body)?;
        resp.vectors.into_iter().next().ok_or_else(|| ProviderError::Network {
            provider: self.config.model.clone(),
            message: "empty vector list".into(),
            retryable: false,
        })
    }
}

/// Completion endpoint: POST {model, system, prompt} -> {text}.
pub struct HttpLlm {
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpLlm {
    pub fn new(config: HttpProviderConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .expect("client construction");
        HttpLlm { config, client }
    }
}

impl LlmProvider for HttpLlm {
    fn id(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, request: &QaRequest) -> Result<String, ProviderError> {
        let prompt = request.rendered_prompt();
        let body = CompleteRequestBody {
            model: &self.config.model,
            system: &request.system_instruction,
            prompt: &prompt,
        };
        let resp: CompleteResponseBody = post_with_retries(&self.client, &self.config, &body)?;
        Ok(resp.text)
    }
}

fn post_with_retries<B: Serialize, R: for<'de> Deserialize<'de>>(
    client: &reqwest::blocking::Client,
    config: &HttpProviderConfig,
    body: &B,
) -> Result<R, ProviderError> {
    let mut last: Option<ProviderError> = None;
    for _ in 0..=config.retries {
        match client.post(&config.endpoint).json(body).send() {
            Ok(resp) => {
                let status = resp.status().as_u16();
                if status >= 400 {
                    let body = resp.text().unwrap_or_default();
                    let err = ProviderError::Http { provider: config.model.clone(), status, body };
                    if !err.retryable() {
                        return Err(err);
                    }
                    last = Some(err);
                } else {
                    return resp.json::<R>().map_err(|e| ProviderError::Network {
                        provider: config.model.clone(),
                        message: format!("bad response body: {e}"),
                        retryable: false,
                    });
                }
            }
            Err(e) => {
                last = Some(ProviderError::Network {
                    provider: config.model.clone(),
                    message: e.to_string(),
                    retryable: true,
                });
            }
        }
    }
    Err(last.unwrap_or(ProviderError::Network {
        provider: config.model.clone(),
        message: "no attempts made".into(),
        retryable: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_embedder_is_deterministic_and_fixed_dim() {
        let e = HashEmbedder::default();
        let a = e.embed("sticking coefficient of TMA in PillarHall-3").unwrap();
        let b = e.embed("sticking coefficient of TMA in PillarHall-3").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 256);
        assert!(a.iter().any(|x| *x != 0.0));
    }

    #[test]
    fn hash_embedder_separates_topics() {
        let e = HashEmbedder::default();
        let q = e.embed("cTMA sticking coefficient PillarHall").unwrap();
        let on_topic = e.embed("the cTMA sticking coefficient in PillarHall structures was 0.00572").unwrap();
        let off_topic = e.embed("annual rainfall statistics for coastal regions").unwrap();
        assert!(super::super::cosine(&q, &on_topic) > super::super::cosine(&q, &off_topic));
    }

    #[test]
    fn scripted_llm_keys_off_query_id() {
        let mut m = BTreeMap::new();
        m.insert("Q.2".to_string(), "a,b\n1,2\n".to_string());
        let llm = ScriptedLlm::new(m);
        let req = QaRequest {
            query_id: Some("Q.2".into()),
            system_instruction: String::new(),
            query: "q".into(),
            contexts: vec![],
            prompt_template: None,
        };
        assert_eq!(llm.complete(&req).unwrap(), "a,b\n1,2\n");
        let missing = QaRequest { query_id: Some("Q.3".into()), ..req };
        assert!(matches!(llm.complete(&missing), Err(ProviderError::NoScript(_))));
    }

    #[test]
    fn http_bodies_serialize_to_contract() {
        let body = EmbedRequestBody { model: "nomic-embed-text", input: vec!["hello"] };
        let json = serde_json::to_string(&body).unwrap();
        assert_eq!(json, r#"{"model":"nomic-embed-text","input":["hello"]}"#);
        let parsed: EmbedResponseBody =
            serde_json::from_str(r#"{"vectors":[[0.25,-1.0]]}"#).unwrap();
        assert_eq!(parsed.vectors[0], vec![0.25, -1.0]);
        let body = CompleteRequestBody { model: "m", system: "s", prompt: "p" };
        assert_eq!(serde_json::to_string(&body).unwrap(), r#"{"model":"m","system":"s","prompt":"p"}"#);
        let parsed: CompleteResponseBody = serde_json::from_str(r#"{"text":"hi"}"#).unwrap();
        assert_eq!(parsed.text, "hi");
    }

    #[test]
    fn env_overrides_apply() {
        std::env::set_var("REVIQ_PROVIDER_TIMEOUT_SECS", "7");
        std::env::set_var("REVIQ_PROVIDER_RETRIES", "5");
        let cfg = HttpProviderConfig {
            endpoint: "http://localhost:1/none".into(),
            model: "m".into(),
            timeout_secs: 60,
            retries: 2,
        }
        .with_env_overrides();
        assert_eq!(cfg.timeout_secs, 7);
        assert_eq!(cfg.retries, 5);
        std::env::remove_var("REVIQ_PROVIDER_TIMEOUT_SECS");
        std::env::remove_var("REVIQ_PROVIDER_RETRIES");
    }
}
