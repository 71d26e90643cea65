//! Aggregated results: one cell per (doc level, query level) with class
//! counts, plus per-query records carrying full provenance so any figure can
//! be regenerated without rerunning. Accuracy is reported to one decimal
//! percent; empty cells report n/a.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::prompt::{DocLevel, QueryLevel};
use crate::sql::ErrorClass;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub database: String,
    pub doc_level: DocLevel,
    pub query_level: QueryLevel,
    /// "ok" when the pipeline completed; otherwise the failing stage
    /// (disambiguate, column_selection, assemble, completion, extract,
    /// canonicalize_pred, canonicalize_gold).
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selected_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_sql: Option<String>,
    pub class: ErrorClass,
    /// Execution-oracle verdict when both statements ran; exact-match misses
    /// that execute equal are surfaced via `exec_correct` per cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_match: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl QueryRecord {
    pub fn is_pipeline_failure(&self) -> bool {
        self.stage != "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub doc_level: DocLevel,
    pub query_level: QueryLevel,
    pub total: usize,
    pub correct: usize,
    pub counts_by_class: BTreeMap<ErrorClass, usize>,
    /// Queries that missed exact match but matched under execution.
    pub exec_correct: usize,
    /// correct / total; absent for empty cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl CellReport {
    pub fn from_records(
        doc_level: DocLevel,
        query_level: QueryLevel,
        records: &[QueryRecord],
    ) -> Self {
        let mut counts_by_class: BTreeMap<ErrorClass, usize> =
            ErrorClass::ALL.iter().map(|c| (*c, 0)).collect();
        let mut exec_correct = 0;
        let mut total = 0;
        for record in records {
            if record.doc_level != doc_level || record.query_level != query_level {
                continue;
            }
            total += 1;
            *counts_by_class.entry(record.class).or_insert(0) += 1;
            if record.class != ErrorClass::Correct && record.exec_match == Some(true) {
                exec_correct += 1;
            }
        }
        let correct = counts_by_class[&ErrorClass::Correct];
        let accuracy = if total > 0 {
            Some(correct as f64 / total as f64)
        } else {
            None
        };
        CellReport {
            doc_level,
            query_level,
            total,
            correct,
            counts_by_class,
            exec_correct,
            accuracy,
        }
    }

    /// One-decimal percent, e.g. "26.7"; empty for n/a cells.
    pub fn accuracy_percent(&self) -> String {
        match self.accuracy {
            Some(fraction) => format!("{:.1}", fraction * 100.0),
            None => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub cells: Vec<CellReport>,
    pub records: Vec<QueryRecord>,
}

impl Report {
    pub fn from_records(
        doc_levels: &[DocLevel],
        query_levels: &[QueryLevel],
        records: Vec<QueryRecord>,
    ) -> Self {
        let mut cells = Vec::new();
        for doc_level in doc_levels {
            for query_level in query_levels {
                cells.push(CellReport::from_records(*doc_level, *query_level, &records));
            }
        }
        Report { cells, records }
    }

    pub fn has_pipeline_failures(&self) -> bool {
        self.records.iter().any(QueryRecord::is_pipeline_failure)
    }

    /// One row per cell: docLevel, queryLevel, total, correct, output,
    /// fuzzy, other, accuracy.
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("doc_level,query_level,total,correct,output,fuzzy,other,accuracy\n");
        for cell in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                cell.doc_level.label(),
                cell.query_level.label(),
                cell.total,
                cell.correct,
                cell.counts_by_class[&ErrorClass::Output],
                cell.counts_by_class[&ErrorClass::Fuzzy],
                cell.counts_by_class[&ErrorClass::Other],
                cell.accuracy_percent(),
            ));
        }
        out
    }

    /// One JSON object per per-query record.
    pub fn details_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Long-format stacked-bar data: one row per (cell, class) with the
    /// count, mirroring the correct-vs-error-classes bar structure.
    pub fn plotdata_csv(&self) -> String {
        let mut out = String::from("doc_level,query_level,class,count\n");
        for cell in &self.cells {
            for class in ErrorClass::ALL {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    cell.doc_level.label(),
                    cell.query_level.label(),
                    class.label(),
                    cell.counts_by_class[&class],
                ));
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        let mut content = serde_json::to_string_pretty(self).expect("report serializes");
        content.push('\n');
        std::fs::write(path, content).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&content)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }
}

/// Writes summary.csv, details.jsonl, and plotdata.csv under `dir`.
pub fn emit_report(report: &Report, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let outputs = [
        ("summary.csv", report.summary_csv()),
        ("details.jsonl", report.details_jsonl()),
        ("plotdata.csv", report.plotdata_csv()),
    ];
    let mut paths = Vec::new();
    for (name, content) in outputs {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        paths.push(path);
    }
    Ok(paths)
}
