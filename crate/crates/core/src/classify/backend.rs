//! HTTP chat-completion backend.
//!
//! Wire format is the OpenAI chat-completions shape, which most hosted and
//! proxy endpoints accept:
//!
//! request  `{"model", "messages": [{"role", "content"}], "temperature", "response_format"?}`
//! response `{"choices": [{"message": {"content"}}], "usage": {"prompt_tokens", "completion_tokens"}}`
//!
//! `response_format` is present only for schema-constrained calls:
//! `{"type": "json_schema", "json_schema": {"name", "schema", "strict": true}}`.
//! Latency is measured on the client.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseFormat {
    #[serde(rename = "type")]
    pub kind: String,
    pub json_schema: NamedSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSchema {
    pub name: String,
    pub schema: Value,
    pub strict: bool,
}

impl ResponseFormat {
    pub fn json_schema(name: &str, schema: Value) -> Self {
        ResponseFormat { kind: "json_schema".into(), json_schema: NamedSchema { name: name.into(), schema, strict: true } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response_format: Option<ResponseFormat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatCompletion {
    pub content: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("HTTP {0}: {1}")]
    Status(u16, String),
    #[error("unexpected response body: {0}")]
    InvalidResponse(String),
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatCompletion, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatCompletion, BackendError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CallTelemetry {
    pub model: String,
    pub latency_ms: u64,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { retries: 2, base_backoff_ms: 500 }
    }
}

/// Calls the backend, retrying transport failures with exponential backoff.
/// On failure returns the last error and the number of attempts made.
pub fn complete_with_retry(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    policy: RetryPolicy,
) -> Result<(ChatCompletion, CallTelemetry), (BackendError, u32)> {
    let mut attempt = 0u32;
    loop {
        attempt += 1;
        let start = Instant::now();
        match backend.complete(request) {
            Ok(c) => {
                let telemetry = CallTelemetry {
                    model: request.model.clone(),
                    latency_ms: start.elapsed().as_millis() as u64,
                    input_tokens: c.input_tokens,
                    output_tokens: c.output_tokens,
                    attempts: attempt,
                };
                return Ok((c, telemetry));
            }
            Err(e) if attempt > policy.retries => return Err((e, attempt)),
            Err(_) => {
                let wait = policy.base_backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(wait));
            }
        }
    }
}

/// Blocking HTTP client for an OpenAI-compatible chat-completions endpoint.
pub struct HttpChatBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpChatBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpChatBackend { endpoint: endpoint.into(), api_key, client })
    }
}

pub(crate) fn parse_completion_body(body: &Value) -> Result<ChatCompletion, BackendError> {
    let content = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::InvalidResponse("missing choices[0].message.content".into()))?;
    Ok(ChatCompletion {
        content: content.to_string(),
        input_tokens: body.pointer("/usage/prompt_tokens").and_then(Value::as_u64),
        output_tokens: body.pointer("/usage/completion_tokens").and_then(Value::as_u64),
    })
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatCompletion, BackendError> {
        let mut req = self.client.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Status(status.as_u16(), text.chars().take(200).collect()));
        }
        let body: Value = serde_json::from_str(&text).map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        parse_completion_body(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Flaky {
        failures: u32,
        calls: AtomicU32,
    }

    impl ChatBackend for Flaky {
        fn complete(&self, _: &ChatRequest) -> Result<ChatCompletion, BackendError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.failures {
                Err(BackendError::Timeout)
            } else {
                Ok(ChatCompletion { content: "ok".into(), input_tokens: Some(3), output_tokens: Some(1) })
            }
        }
    }

    fn req() -> ChatRequest {
        ChatRequest { model: "m".into(), messages: vec![ChatMessage::user("hi")], temperature: 0.0, response_format: None }
    }

    #[test]
    fn retries_until_success() {
        let b = Flaky { failures: 2, calls: AtomicU32::new(0) };
        let (c, t) = complete_with_retry(&b, &req(), RetryPolicy { retries: 2, base_backoff_ms: 0 }).unwrap();
        assert_eq!(c.content, "ok");
        assert_eq!(t.attempts, 3);
        assert_eq!(t.input_tokens, Some(3));
    }

    #[test]
    fn gives_up_after_retries() {
        let b = Flaky { failures: 5, calls: AtomicU32::new(0) };
        let err = complete_with_retry(&b, &req(), RetryPolicy { retries: 1, base_backoff_ms: 0 }).unwrap_err();
        assert_eq!(err, (BackendError::Timeout, 2));
    }

    #[test]
    fn request_serialization_omits_absent_schema() {
        let v = serde_json::to_value(req()).unwrap();
        assert_eq!(v["messages"][0]["role"], "user");
        assert!(v.get("response_format").is_none());
        let mut r = req();
        r.response_format = Some(ResponseFormat::json_schema("x", serde_json::json!({"type": "object"})));
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["response_format"]["type"], "json_schema");
        assert_eq!(v["response_format"]["json_schema"]["strict"], true);
    }

    #[test]
    fn completion_body_parsing() {
        let body = serde_json::json!({"choices": [{"message": {"content": "ANSWER: true"}}], "usage": {"prompt_tokens": 10, "completion_tokens": 2}});
        let c = parse_completion_body(&body).unwrap();
        assert_eq!((c.content.as_str(), c.input_tokens, c.output_tokens), ("ANSWER: true", Some(10), Some(2)));
        assert!(parse_completion_body(&serde_json::json!({"choices": []})).is_err());
    }
}
