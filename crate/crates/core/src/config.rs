//! Run configuration (TOML).
//!
//! ```toml
//! seed = 7
//! mode = "subject-import"        # boolean | subject-import | all-terms-nonempty
//! ensemble_size = 5
//! tau = 1
//! output_dir = "runs/offline"
//! ce_metric = { kind = "congruence-gap" }   # | pair-flip-rate | { kind = "external", value = 3.1 }
//! # strategies = [{ strategy = "ensemble-only" }, { strategy = "tiebreaker", tau = 1 }]
//!
//! [dataset]
//! source = "synthetic"           # or: source = "file", path = "data.jsonl"
//! seed = 7
//! pairs = 256                    # omit for every determinate form
//!
//! [cv]
//! folds = 5
//! inner = 200
//! stratified = false
//!
//! [parallelism]
//! kind = "rayon"                 # or "sequential"; optional threads = N
//!
//! [extraction]
//! chain = ["rule-based"]         # remote model ids and/or "rule-based"
//! attempts_per_extractor = 1
//!
//! [classifiers]
//! simulated_grid = 3             # seed for the 12 built-in simulated configs
//! # [[classifiers.configs]] ... explicit ClassifierConfig entries
//!
//! # [remote]
//! # endpoint = "https://host/v1/chat/completions"
//! # api_key_env = "CHAT_API_KEY" # name of the variable, never the key
//! # timeout_ms = 60000
//! # retries = 2
//! # backoff_ms = 500
//! ```
//!
//! Relative paths resolve against the config file's directory.

use crate::classify::{simulated_grid, BackendSpec, ChatBackend, Classifier, ClassifierConfig, HttpChatBackend, RetryPolicy};
use crate::dataset::{load_dataset, DatasetError, DatasetInstance};
use crate::extraction::{ExtractionChain, ExtractorConfig, RULE_BASED};
use crate::fusion::FusionStrategy;
use crate::harness::{generate_synthetic, Lexicon, RunSettings, SynthError};
use crate::logic::SemanticsMode;
use crate::metrics::CeMetricKind;
use crate::par::Parallelism;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

type RemoteParts = (Arc<dyn ChatBackend>, RetryPolicy);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    File {
        path: PathBuf,
    },
    Synthetic {
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pairs: Option<usize>,
        /// Labels the corpus; defaults to the run's mode.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<SemanticsMode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSection {
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_inner")]
    pub inner: usize,
    #[serde(default)]
    pub stratified: bool,
}

fn default_folds() -> usize {
    5
}
fn default_inner() -> usize {
    200
}
fn default_ensemble() -> usize {
    5
}
fn default_tau() -> usize {
    1
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection { folds: 5, inner: 200, stratified: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_grid: Option<u64>,
    #[serde(default)]
    pub configs: Vec<ClassifierConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSection {
    pub endpoint: String,
    /// Environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_timeout() -> u64 {
    60_000
}
fn default_retries() -> u32 {
    2
}
fn default_backoff() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SemanticsMode,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default)]
    pub ce_metric: CeMetricKind,
    #[serde(default = "FusionStrategy::standard_set")]
    pub strategies: Vec<FusionStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub parallelism: Parallelism,
    #[serde(default)]
    pub extraction: ExtractorConfig,
    #[serde(default)]
    pub classifiers: ClassifierSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteSection>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("environment variable `{0}` (named by remote.api_key_env) is not set")]
    MissingKey(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn is_env_name(s: &str) -> bool {
    !s.is_empty() && !s.starts_with(|c: char| c.is_ascii_digit()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads, validates and makes relative paths absolute against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.rebase(&base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.dataset {
            DatasetSpec::File { path } => fix(path),
            DatasetSpec::Synthetic { lexicon: Some(l), .. } => fix(l),
            DatasetSpec::Synthetic { .. } => {}
        }
        if let Some(o) = &mut self.output_dir {
            fix(o);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn candidate_configs(&self) -> Vec<ClassifierConfig> {
        let mut out: Vec<ClassifierConfig> = self.classifiers.simulated_grid.map(simulated_grid).unwrap_or_default();
        out.extend(self.classifiers.configs.iter().cloned());
        out
    }

    fn needs_remote(&self) -> bool {
        self.candidate_configs().iter().any(|c| c.backend == BackendSpec::Remote)
            || self.extraction.chain.iter().any(|e| e != RULE_BASED)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let candidates = self.candidate_configs();
        if candidates.is_empty() {
            return Err(invalid("no classifiers: set classifiers.simulated_grid or add classifiers.configs"));
        }
        let mut ids: Vec<&str> = candidates.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate classifier id `{}`", w[0])));
        }
        for c in &candidates {
            c.validate().map_err(|e| invalid(e.to_string()))?;
        }
        if self.ensemble_size == 0 || self.ensemble_size > candidates.len() {
            return Err(invalid(format!("ensemble_size must be within 1..={}, got {}", candidates.len(), self.ensemble_size)));
        }
        if self.cv.folds < 2 {
            return Err(invalid("cv.folds must be at least 2"));
        }
        if self.cv.inner == 0 {
            return Err(invalid("cv.inner must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(invalid("strategies must not be empty"));
        }
        if let CeMetricKind::External { value } = self.ce_metric {
            if value.is_nan() || value < 0.0 {
                return Err(invalid("ce_metric.value must be >= 0"));
            }
        }
        self.extraction.validate().map_err(|e| invalid(e.to_string()))?;
        match &self.remote {
            None if self.needs_remote() => return Err(invalid("remote classifiers or extractors need a [remote] section")),
            Some(r) => {
                if r.endpoint.trim().is_empty() {
                    return Err(invalid("remote.endpoint must not be empty"));
                }
                if let Some(name) = &r.api_key_env {
                    if !is_env_name(name) {
                        return Err(invalid(format!("remote.api_key_env must name an environment variable, got `{name}`")));
                    }
                }
            }
            None => {}
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            mode: self.mode,
            strategies: self.strategies.clone(),
            tau: self.tau,
            ce_metric: self.ce_metric,
            ensemble_size: self.ensemble_size,
            folds: self.cv.folds,
            inner: self.cv.inner,
            seed: self.seed,
            stratified: self.cv.stratified,
            parallelism: self.parallelism,
        }
    }

    pub fn load_data(&self) -> Result<Vec<DatasetInstance>, ConfigError> {
        match &self.dataset {
            DatasetSpec::File { path } => Ok(load_dataset(path)?),
            DatasetSpec::Synthetic { seed, pairs, mode, lexicon } => {
                let lex = match lexicon {
                    None => Lexicon::builtin(),
                    Some(p) => {
                        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.clone(), source })?;
                        serde_json::from_str(&text).map_err(|e| invalid(format!("lexicon {}: {e}", p.display())))?
                    }
                };
                Ok(generate_synthetic(&lex, mode.unwrap_or(self.mode), *seed, *pairs)?.into_iter().map(|i| i.instance).collect())
            }
        }
    }

    fn remote_backend(&self) -> Result<Option<RemoteParts>, ConfigError> {
        let Some(r) = &self.remote else { return Ok(None) };
        let key = match &r.api_key_env {
            None => None,
            Some(name) => Some(std::env::var(name).map_err(|_| ConfigError::MissingKey(name.clone()))?),
        };
        let backend = HttpChatBackend::new(r.endpoint.clone(), key, Duration::from_millis(r.timeout_ms))
            .map_err(|e| invalid(e.to_string()))?;
        Ok(Some((Arc::new(backend), RetryPolicy { retries: r.retries, base_backoff_ms: r.backoff_ms })))
    }

    /// Builds the candidate classifiers and the extraction chain.
    pub fn build(&self) -> Result<(Vec<Arc<dyn Classifier>>, ExtractionChain), ConfigError> {
        let remote = if self.needs_remote() { self.remote_backend()? } else { None };
        let remote_ref = remote.as_ref().map(|(b, r)| (b, *r));
        let candidates = self
            .candidate_configs()
            .iter()
            .map(|c| c.build(remote_ref).map_err(|e| invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let chain = self.extraction.build(remote_ref).map_err(|e| invalid(e.to_string()))?;
        Ok((candidates, chain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OFFLINE: &str = r#"
seed = 7
[dataset]
source = "synthetic"
seed = 7
pairs = 40
[cv]
inner = 30
[classifiers]
simulated_grid = 3
"#;

    #[test]
    fn minimal_offline_config() {
        let cfg = RunConfig::from_toml(OFFLINE).unwrap();
        assert_eq!(cfg.mode, SemanticsMode::SubjectImport);
        assert_eq!(cfg.strategies.len(), 7);
        assert_eq!(cfg.load_data().unwrap().len(), 80);
        let (cands, chain) = cfg.build().unwrap();
        assert_eq!(cands.len(), 12);
        assert_eq!(chain.extractors.len(), 1);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::from_toml(OFFLINE).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn secrets_are_not_config_values() {
        let text = format!("{OFFLINE}\n[remote]\nendpoint = \"http://x\"\napi_key = \"sk-123\"\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Parse(_))));
        let text = format!("{OFFLINE}\n[remote]\nendpoint = \"http://x\"\napi_key_env = \"sk-123\"\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn missing_key_variable() {
        let text = r#"
[dataset]
source = "synthetic"
[classifiers]
simulated_grid = 1
[extraction]
chain = ["remote-model", "rule-based"]
[remote]
endpoint = "http://127.0.0.1:9/v1/chat/completions"
api_key_env = "SYLLOGIC_TEST_UNSET_VARIABLE"
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert!(matches!(cfg.build(), Err(ConfigError::MissingKey(_))));
    }

    #[test]
    fn validation_errors() {
        let bad = OFFLINE.replace("seed = 7\n[dataset]", "seed = 7\nensemble_size = 13\n[dataset]");
        assert!(matches!(RunConfig::from_toml(&bad), Err(ConfigError::Invalid(_))));
        let no_remote = format!("{OFFLINE}\n[extraction]\nchain = [\"some-model\"]\n");
        assert!(matches!(RunConfig::from_toml(&no_remote), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_toml("seed = 1"), Err(ConfigError::Parse(_))));
    }
}
