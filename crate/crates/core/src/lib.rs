//! Toolkit for documenting data ambiguities in relational databases and
//! evaluating Text-to-SQL predictions against gold answers.
//!
//! The pipeline: open a database ([`ingest`]), draft value-consistency /
//! coverage / granularity documentation from the data ([`profile`]), persist
//! and merge it with human-authored docs ([`docs`]), assemble prompts at
//! controlled disambiguation levels ([`prompt`]), complete them against a
//! live or replayed model ([`llm`]), and score the predicted SQL with
//! exact-match and execution oracles plus an error taxonomy ([`sql`]).
//! [`harness`] runs the full documentation-level x query-level grid and
//! writes reports.

pub mod docs;
pub mod harness;
pub mod ingest;
pub mod llm;
pub mod profile;
pub mod prompt;
pub mod sql;

#[cfg(any(test, feature = "fixtures"))]
pub mod fixtures;

pub use docs::{DocEntry, DocKind, DocSet, Provenance, QuerySpec, Scope};
pub use ingest::{ColumnDef, DatabaseHandle, RowSample, Schema, TableDef, Value};
pub use llm::{CompletionRequest, Transcript};
pub use profile::{CoverageProfile, FormatProfile, GranularityProfile, GranularityVerdict};
pub use prompt::{ColumnRef, DocLevel, Prompt, QueryLevel};
pub use sql::{CanonicalQuery, ErrorClass};
