//! Experiment grid runner: documentation levels x query-disambiguation
//! levels over one or more databases, with per-query provenance records and
//! CSV/JSONL reporting. Replay-mode runs are bit-deterministic.

mod config;
mod report;
mod runner;

pub use config::{BackendKind, DatabaseConfig, ExperimentConfig};
pub use report::{emit_report, CellReport, QueryRecord, Report};
pub use runner::run_grid;

use thiserror::Error;

use crate::docs::DocError;
use crate::ingest::IngestError;
use crate::llm::LlmError;
use crate::prompt::PromptError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error for {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Docs(#[from] DocError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}
