//! Structure extraction with ordered fallback over rule-based and remote
//! extractors. The first extractor whose output validates wins.

use crate::classify::backend::{complete_with_retry, BackendError, ChatBackend, ChatMessage, ChatRequest, ResponseFormat};
use crate::classify::{render_extraction_prompt, CallTelemetry, RetryPolicy};
use crate::dataset::Plausibility;
use crate::logic::{Proposition, PropositionType, SyllogismStructure, TermId};
use crate::parser::{normalize_term, parse_syllogism, term_key, ParseFailure};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

pub const RULE_BASED: &str = "rule-based";

/// The JSON record an extractor model is asked to produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStructure {
    pub terms: Vec<String>,
    pub premise1: RawPropositionRecord,
    pub premise2: RawPropositionRecord,
    pub conclusion: RawPropositionRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropositionRecord {
    #[serde(rename = "type")]
    pub ptype: String,
    pub subject: String,
    pub predicate: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionFailure {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("proposition term not among the listed terms")]
    TermMismatch,
    #[error("parse failure: {0}")]
    Parse(ParseFailure),
    #[error("backend: {0}")]
    Backend(BackendError),
    #[error("no extractor configured")]
    EmptyChain,
}

impl ExtractionFailure {
    pub fn code(&self) -> &'static str {
        match self {
            ExtractionFailure::Malformed(_) => "malformed",
            ExtractionFailure::TermMismatch => "term-mismatch",
            ExtractionFailure::Parse(p) => p.code(),
            ExtractionFailure::Backend(_) => "backend",
            ExtractionFailure::EmptyChain => "empty-chain",
        }
    }
}

/// Checks a raw record against the three-term schema and resolves every
/// proposition term to one of the listed terms.
pub fn validate_structure(raw: &RawStructure) -> Result<SyllogismStructure, ExtractionFailure> {
    let [t0, t1, t2] = &raw.terms[..] else {
        return Err(ExtractionFailure::Malformed(format!("expected 3 terms, got {}", raw.terms.len())));
    };
    let terms = [t0, t1, t2].map(|t| normalize_term(t));
    let keys = terms.clone().map(|t| term_key(&t));
    if terms.iter().any(String::is_empty) || keys[0] == keys[1] || keys[0] == keys[2] || keys[1] == keys[2] {
        return Err(ExtractionFailure::Malformed("terms must be three distinct nonempty strings".into()));
    }
    let resolve = |t: &str| {
        let k = term_key(&normalize_term(t));
        keys.iter().position(|x| *x == k).map(|i| TermId::new(terms[i].clone())).ok_or(ExtractionFailure::TermMismatch)
    };
    let prop = |r: &RawPropositionRecord| -> Result<Proposition, ExtractionFailure> {
        let mut letters = r.ptype.trim().chars();
        let ptype = match (letters.next().and_then(PropositionType::from_letter), letters.next()) {
            (Some(t), None) => t,
            _ => return Err(ExtractionFailure::Malformed(format!("bad proposition type `{}`", r.ptype))),
        };
        Ok(Proposition { ptype, subject: resolve(&r.subject)?, predicate: resolve(&r.predicate)? })
    };
    let s = SyllogismStructure {
        terms: terms.clone().map(TermId::new),
        premise1: prop(&raw.premise1)?,
        premise2: prop(&raw.premise2)?,
        conclusion: prop(&raw.conclusion)?,
    };
    s.validate().map_err(|e| ExtractionFailure::Malformed(e.to_string()))?;
    Ok(s)
}

pub trait Extractor: Send + Sync {
    fn id(&self) -> &str;
    fn extract(&self, text: &str) -> Result<SyllogismStructure, ExtractionFailure>;
}

pub struct RuleBasedExtractor;

impl Extractor for RuleBasedExtractor {
    fn id(&self) -> &str {
        RULE_BASED
    }

    fn extract(&self, text: &str) -> Result<SyllogismStructure, ExtractionFailure> {
        parse_syllogism(text).map_err(ExtractionFailure::Parse)
    }
}

fn proposition_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "type": {"type": "string", "enum": ["A", "E", "I", "O"]},
            "subject": {"type": "string"},
            "predicate": {"type": "string"}
        },
        "required": ["type", "subject", "predicate"],
        "additionalProperties": false
    })
}

/// JSON schema sent with schema-constrained extraction requests.
pub fn structure_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "terms": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
            "premise1": proposition_schema(),
            "premise2": proposition_schema(),
            "conclusion": proposition_schema()
        },
        "required": ["terms", "premise1", "premise2", "conclusion"],
        "additionalProperties": false
    })
}

pub struct RemoteExtractor {
    pub model: String,
    pub retry: RetryPolicy,
    pub backend: Arc<dyn ChatBackend>,
}

impl RemoteExtractor {
    /// Sends the extraction prompt with a response schema and decodes the
    /// reply strictly; no repair is attempted.
    pub fn remote_extract(&self, text: &str) -> Result<(RawStructure, CallTelemetry), ExtractionFailure> {
        let request = ChatRequest {
            model: self.model.clone(),
            messages: vec![ChatMessage::user(render_extraction_prompt(text))],
            temperature: 0.0,
            response_format: Some(ResponseFormat::json_schema("syllogism_structure", structure_schema())),
        };
        let (completion, telemetry) =
            complete_with_retry(self.backend.as_ref(), &request, self.retry).map_err(|(e, _)| ExtractionFailure::Backend(e))?;
        let raw = serde_json::from_str(completion.content.trim()).map_err(|e| ExtractionFailure::Malformed(e.to_string()))?;
        Ok((raw, telemetry))
    }
}

impl Extractor for RemoteExtractor {
    fn id(&self) -> &str {
        &self.model
    }

    fn extract(&self, text: &str) -> Result<SyllogismStructure, ExtractionFailure> {
        let (raw, _) = self.remote_extract(text)?;
        validate_structure(&raw)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    /// `rule-based` or a remote model id, in fallback order.
    pub chain: Vec<String>,
    #[serde(default = "one")]
    pub attempts_per_extractor: u32,
}

fn one() -> u32 {
    1
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig { chain: vec![RULE_BASED.into()], attempts_per_extractor: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractorConfigError {
    #[error("extraction chain is empty")]
    Empty,
    #[error("attempts_per_extractor must be at least 1")]
    ZeroAttempts,
    #[error("extractor `{0}` needs a remote backend but none is configured")]
    NoRemote(String),
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<(), ExtractorConfigError> {
        if self.chain.is_empty() {
            return Err(ExtractorConfigError::Empty);
        }
        if self.attempts_per_extractor == 0 {
            return Err(ExtractorConfigError::ZeroAttempts);
        }
        Ok(())
    }

    pub fn build(&self, remote: Option<(&Arc<dyn ChatBackend>, RetryPolicy)>) -> Result<ExtractionChain, ExtractorConfigError> {
        self.validate()?;
        let extractors = self
            .chain
            .iter()
            .map(|id| -> Result<Arc<dyn Extractor>, ExtractorConfigError> {
                if id == RULE_BASED {
                    return Ok(Arc::new(RuleBasedExtractor));
                }
                let (backend, retry) = remote.ok_or_else(|| ExtractorConfigError::NoRemote(id.clone()))?;
                Ok(Arc::new(RemoteExtractor { model: id.clone(), retry, backend: backend.clone() }))
            })
            .collect::<Result<_, _>>()?;
        Ok(ExtractionChain { extractors, attempts_per_extractor: self.attempts_per_extractor })
    }
}

pub struct ExtractionChain {
    pub extractors: Vec<Arc<dyn Extractor>>,
    pub attempts_per_extractor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionOutcome {
    /// On failure, the last extractor's error.
    pub result: Result<SyllogismStructure, ExtractionFailure>,
    pub extractor_used: Option<String>,
    pub attempts: u32,
    pub plausibility: Option<Plausibility>,
}

impl ExtractionChain {
    pub fn rule_based() -> Self {
        ExtractionChain { extractors: vec![Arc::new(RuleBasedExtractor)], attempts_per_extractor: 1 }
    }

    pub fn extract(&self, text: &str, plausibility: Option<Plausibility>) -> ExtractionOutcome {
        let mut attempts = 0;
        let mut last = ExtractionFailure::EmptyChain;
        for ex in &self.extractors {
            for _ in 0..self.attempts_per_extractor {
                attempts += 1;
                match ex.extract(text) {
                    Ok(s) => {
                        return ExtractionOutcome { result: Ok(s), extractor_used: Some(ex.id().to_string()), attempts, plausibility }
                    }
                    Err(e) => last = e,
                }
            }
        }
        ExtractionOutcome { result: Err(last), extractor_used: None, attempts, plausibility }
    }
}
