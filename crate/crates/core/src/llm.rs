//! Prompt construction, the completion endpoint client, and response parsing.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::jsonld::{parse_jsonld, JsonLdError};
use crate::triple::{TermKind, TripleDocument};
use crate::vocab::{validate_vocabulary, ValidationReport, Vocabulary};

/// Opening instruction of every prompt; the vocabulary list follows it.
pub const INSTRUCTION: &str = "Using the following vocabulary list, generate responses in the form of \
(subject-predicate-object) triples. Ensure all terms are used consistently according to the provided definitions:";

/// Closing instruction restricting the answer to the accepted JSON-LD subset.
pub const FORMAT_INSTRUCTION: &str = "Answer ONLY with JSON-LD: a single node object (or an array of node objects), \
each with an \"@id\", an optional \"@context\" mapping prefixes to IRI strings, and one key per predicate whose \
value is {\"@id\": ...} or a literal. Do not use @graph, blank nodes or @reverse.";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("the vocabulary is empty")]
    EmptyVocabulary,
    #[error("the query is empty")]
    EmptyQuery,
    #[error("invalid endpoint configuration: {0}")]
    InvalidConfig(String),
    #[error("endpoint {url} unreachable: {message}")]
    EndpointUnreachable { url: String, message: String },
    #[error("endpoint answered with status {0}")]
    BadStatus(u16),
    #[error("malformed response envelope: {0}")]
    MalformedEnvelope(String),
    #[error("no mock response for prompt hash {0}")]
    MockMiss(String),
    #[error("reading mock response: {0}")]
    Io(#[from] std::io::Error),
    #[error("no JSON object found in the response")]
    NoJsonFound,
    #[error(transparent)]
    JsonLd(#[from] JsonLdError),
}

pub struct PromptRequest<'a> {
    pub vocabulary: &'a Vocabulary,
    /// Retrieved context, possibly empty.
    pub context: &'a str,
    pub user_query: &'a str,
}

fn kind_name(kind: TermKind) -> &'static str {
    match kind {
        TermKind::Concept => "concept",
        TermKind::Relation => "relation",
        TermKind::Attribute => "attribute",
    }
}

pub fn build_prompt(req: &PromptRequest<'_>) -> Result<String, LlmError> {
    if req.vocabulary.is_empty() {
        return Err(LlmError::EmptyVocabulary);
    }
    if req.user_query.trim().is_empty() {
        return Err(LlmError::EmptyQuery);
    }
    let mut out = String::new();
    out.push_str(INSTRUCTION);
    out.push('\n');
    // terms() iterates in id order
    for t in req.vocabulary.terms() {
        out.push_str(&format!("- {} — {} ({})\n", t.id, t.label, kind_name(t.kind)));
    }
    out.push_str("\nContext:\n");
    out.push_str(req.context);
    out.push_str("\n\nTask:\n");
    out.push_str(req.user_query);
    out.push_str("\n\n");
    out.push_str(FORMAT_INSTRUCTION);
    out.push('\n');
    Ok(out)
}

/// First 16 hex digits of the SHA-256 of `prompt`; names mock response files.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))[..16].to_string()
}

fn default_timeout() -> f64 {
    30.0
}

fn default_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LlmEndpointConfig {
    #[serde(default)]
    pub base_url: Option<String>,
    /// Seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub mock_path: Option<PathBuf>,
}

impl LlmEndpointConfig {
    pub fn http(base_url: &str) -> Self {
        LlmEndpointConfig {
            base_url: Some(base_url.to_string()),
            timeout: default_timeout(),
            max_retries: default_retries(),
            mock_path: None,
        }
    }

    pub fn mock(dir: &Path) -> Self {
        LlmEndpointConfig {
            base_url: None,
            timeout: default_timeout(),
            max_retries: default_retries(),
            mock_path: Some(dir.to_path_buf()),
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        match (&self.base_url, &self.mock_path) {
            (Some(_), Some(_)) => Err(LlmError::InvalidConfig("baseUrl and mockPath are mutually exclusive".into())),
            (None, None) => Err(LlmError::InvalidConfig("one of baseUrl or mockPath is required".into())),
            _ if !(self.timeout.is_finite() && self.timeout > 0.0) => {
                Err(LlmError::InvalidConfig("timeout must be a positive number of seconds".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Serialize)]
struct RequestEnvelope<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct ResponseEnvelope {
    text: String,
}

/// Completion client. Retries wait `backoff`, then twice that, and so on.
pub struct Client {
    config: LlmEndpointConfig,
    backoff: Duration,
}

impl Client {
    pub fn new(config: LlmEndpointConfig) -> Result<Self, LlmError> {
        config.validate()?;
        Ok(Client {
            config,
            backoff: Duration::from_secs(1),
        })
    }

    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        match (&self.config.mock_path, &self.config.base_url) {
            (Some(dir), _) => complete_mock(dir, prompt),
            (None, Some(url)) => self.complete_http(url, prompt),
            (None, None) => unreachable!("validated at construction"),
        }
    }

    fn complete_http(&self, base_url: &str, prompt: &str) -> Result<String, LlmError> {
        let url = format!("{}/complete", base_url.trim_end_matches('/'));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(self.config.timeout)))
            .http_status_as_error(false)
            .build()
            .into();
        let payload = serde_json::to_string(&RequestEnvelope { prompt }).expect("prompt serializes");
        let mut attempt = 0;
        loop {
            let sent = agent
                .post(&url)
                .header("Content-Type", "application/json")
                .send(payload.as_str());
            let failure = match sent {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status == 200 {
                        let body = resp
                            .body_mut()
                            .read_to_string()
                            .map_err(|e| LlmError::MalformedEnvelope(e.to_string()))?;
                        let envelope: ResponseEnvelope =
                            serde_json::from_str(&body).map_err(|e| LlmError::MalformedEnvelope(e.to_string()))?;
                        return Ok(envelope.text);
                    }
                    if !(500..600).contains(&status) {
                        return Err(LlmError::BadStatus(status));
                    }
                    LlmError::BadStatus(status)
                }
                Err(e) => LlmError::EndpointUnreachable {
                    url: url.clone(),
                    message: e.to_string(),
                },
            };
            if attempt >= self.config.max_retries {
                return Err(failure);
            }
            let wait = self.backoff * 2u32.saturating_pow(attempt);
            log::warn!("attempt {} failed ({failure}); retrying in {wait:?}", attempt + 1);
            thread::sleep(wait);
            attempt += 1;
        }
    }
}

/// One completion with the default backoff.
pub fn complete(config: &LlmEndpointConfig, prompt: &str) -> Result<String, LlmError> {
    Client::new(config.clone())?.complete(prompt)
}

fn complete_mock(dir: &Path, prompt: &str) -> Result<String, LlmError> {
    let hash = prompt_hash(prompt);
    let path = dir.join(format!("{hash}.txt"));
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LlmError::MockMiss(hash)),
        Err(e) => Err(LlmError::Io(e)),
    }
}

/// The first balanced `{...}` in `raw`, starting at its first `{`. Braces
/// inside JSON strings are ignored.
pub fn extract_first_object(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in raw[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&raw[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extracts, parses and validates the triples of a raw completion.
pub fn parse_response(raw: &str, vocab: &Vocabulary) -> Result<(TripleDocument, ValidationReport), LlmError> {
    let json = extract_first_object(raw).ok_or(LlmError::NoJsonFound)?;
    let doc = parse_jsonld(json)?;
    let report = validate_vocabulary(&doc, vocab);
    Ok((doc, report))
}
