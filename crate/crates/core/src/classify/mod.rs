//! Binary validity classifiers.
//!
//! A classifier maps an instance to a [`Vote`]. Remote classifiers render a
//! prompt, call a chat backend and parse the reply; simulated classifiers
//! draw deterministic votes with a tunable pull toward believability.

pub mod backend;
mod prompts;
mod simulated;

pub use backend::{CallTelemetry, ChatBackend, ChatCompletion, ChatMessage, ChatRequest, HttpChatBackend, RetryPolicy};
pub use prompts::{render_extraction_prompt, render_prompt, PromptKind, EXTRACTION};
pub use simulated::{classify_simulated, simulated_grid, SimulatedBiasParams, SimulatedClassifier};

use crate::dataset::DatasetInstance;
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseStage {
    /// `ANSWER: true|false`
    ExplicitAnswer,
    /// The last nonempty line is a bare answer word.
    LastLine,
    /// Last answer word anywhere in the text.
    LastOccurrence,
    /// Nothing recognizable; counted as invalid.
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    /// 1 = valid.
    pub value: u8,
    pub raw_response: String,
    pub stage: ParseStage,
    /// The backend never answered; kept apart from parse failures.
    pub error: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub telemetry: Option<CallTelemetry>,
}

static EXPLICIT: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\banswer\s*:\s*\**\s*(true|false)\b").unwrap());
static ANY_WORD: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\b(true|false|valid|invalid)\b").unwrap());

fn word_value(w: &str) -> u8 {
    match w.to_ascii_lowercase().as_str() {
        "true" | "valid" => 1,
        _ => 0,
    }
}

/// Reads a validity answer out of free text. Total: unparseable text is a
/// vote for invalid at the default stage.
pub fn parse_response(text: &str) -> Vote {
    let vote = |value, stage| Vote { value, raw_response: text.to_string(), stage, error: false, telemetry: None };
    if let Some(c) = EXPLICIT.captures_iter(text).last() {
        return vote(word_value(&c[1]), ParseStage::ExplicitAnswer);
    }
    if let Some(line) = text.lines().rev().map(str::trim).find(|l| !l.is_empty()) {
        let bare = line.trim_matches(|c: char| !c.is_alphanumeric()).to_ascii_lowercase();
        if matches!(bare.as_str(), "true" | "false" | "valid" | "invalid") {
            return vote(word_value(&bare), ParseStage::LastLine);
        }
    }
    if let Some(m) = ANY_WORD.find_iter(text).last() {
        return vote(word_value(m.as_str()), ParseStage::LastOccurrence);
    }
    vote(0, ParseStage::Default)
}

pub trait Classifier: Send + Sync {
    fn id(&self) -> &str;
    fn classify(&self, instance: &DatasetInstance) -> Vote;
}

/// A (model, prompt) pair served by a chat backend.
pub struct RemoteClassifier {
    pub id: String,
    pub model: String,
    pub prompt: PromptKind,
    pub temperature: f64,
    pub retry: RetryPolicy,
    pub backend: Arc<dyn ChatBackend>,
}

/// Renders the prompt, calls the backend and parses the reply. Exhausted
/// retries give an error-flagged vote of 0.
pub fn classify_remote(c: &RemoteClassifier, text: &str) -> Vote {
    let request = ChatRequest {
        model: c.model.clone(),
        messages: vec![ChatMessage::user(render_prompt(c.prompt, text))],
        temperature: c.temperature,
        response_format: None,
    };
    match backend::complete_with_retry(c.backend.as_ref(), &request, c.retry) {
        Ok((completion, telemetry)) => {
            let mut v = parse_response(&completion.content);
            v.telemetry = Some(telemetry);
            v
        }
        Err((e, attempts)) => Vote {
            value: 0,
            raw_response: e.to_string(),
            stage: ParseStage::Default,
            error: true,
            telemetry: Some(CallTelemetry { model: c.model.clone(), attempts, ..Default::default() }),
        },
    }
}

impl Classifier for RemoteClassifier {
    fn id(&self) -> &str {
        &self.id
    }

    fn classify(&self, instance: &DatasetInstance) -> Vote {
        classify_remote(self, &instance.text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackendSpec {
    /// Uses the run's configured chat endpoint.
    Remote,
    Simulated(SimulatedBiasParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub id: String,
    pub model: String,
    pub prompt: PromptKind,
    #[serde(default)]
    pub temperature: f64,
    pub backend: BackendSpec,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("classifier `{0}`: temperature must be >= 0")]
    Temperature(String),
    #[error("classifier `{0}`: {1}")]
    Simulated(String, String),
    #[error("classifier `{0}` needs a remote backend but none is configured")]
    NoRemote(String),
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ConfigError::Temperature(self.id.clone()));
        }
        if let BackendSpec::Simulated(p) = &self.backend {
            p.validate().map_err(|e| ConfigError::Simulated(self.id.clone(), e))?;
        }
        Ok(())
    }

    pub fn build(&self, remote: Option<(&Arc<dyn ChatBackend>, RetryPolicy)>) -> Result<Arc<dyn Classifier>, ConfigError> {
        self.validate()?;
        Ok(match &self.backend {
            BackendSpec::Simulated(params) => Arc::new(SimulatedClassifier { id: self.id.clone(), params: *params }),
            BackendSpec::Remote => {
                let (backend, retry) = remote.ok_or_else(|| ConfigError::NoRemote(self.id.clone()))?;
                Arc::new(RemoteClassifier {
                    id: self.id.clone(),
                    model: self.model.clone(),
                    prompt: self.prompt,
                    temperature: self.temperature,
                    retry,
                    backend: backend.clone(),
                })
            }
        })
    }
}
