//! Experiment configuration, read from a JSON file. Most keys have defaults;
//! see the README for the documented set.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::prompt::{DocLevel, QueryLevel};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseConfig {
    pub name: String,
    pub db_path: PathBuf,
    pub docs_path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub databases: Vec<DatabaseConfig>,
    pub doc_levels: Vec<DocLevel>,
    pub query_levels: Vec<QueryLevel>,
    pub backend: BackendKind,
    pub output_dir: PathBuf,
    /// Transcript store: replay source, or live recording target.
    #[serde(default)]
    pub transcript_dir: Option<PathBuf>,
    #[serde(default = "default_concurrency_cap")]
    pub concurrency_cap: usize,
    /// Chat-completions endpoint URL; required for the live backend.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Name of the environment variable holding the API credential.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default)]
    pub template_dir: Option<PathBuf>,
    #[serde(default = "default_column_cap")]
    pub column_cap: usize,
    /// Per-request timeout for the live backend, seconds.
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Fold string literals to lowercase before exact-match comparison.
    /// Strict (case-sensitive) by default.
    #[serde(default)]
    pub case_insensitive_strings: bool,
}

fn default_concurrency_cap() -> usize {
    4
}
fn default_model() -> String {
    "gpt-4".to_string()
}
fn default_max_tokens() -> u32 {
    1024
}
fn default_api_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}
fn default_column_cap() -> usize {
    crate::prompt::DEFAULT_COLUMN_CAP
}
fn default_timeout_secs() -> u64 {
    120
}
fn default_max_retries() -> u32 {
    4
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig = serde_json::from_str(&content)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.databases.is_empty() {
            return Err(HarnessError::Config("databases must be non-empty".into()));
        }
        if self.doc_levels.is_empty() || self.query_levels.is_empty() {
            return Err(HarnessError::Config(
                "doc_levels and query_levels must be non-empty".into(),
            ));
        }
        if self.concurrency_cap == 0 {
            return Err(HarnessError::Config(
                "concurrency_cap must be positive".into(),
            ));
        }
        match self.backend {
            BackendKind::Replay => {
                if self.transcript_dir.is_none() {
                    return Err(HarnessError::Config(
                        "replay backend requires transcript_dir".into(),
                    ));
                }
            }
            BackendKind::Live => {
                if self.endpoint.is_none() {
                    return Err(HarnessError::Config(
                        "live backend requires endpoint".into(),
                    ));
                }
                if self.transcript_dir.is_none() {
                    return Err(HarnessError::Config(
                        "live backend requires transcript_dir for recording".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
