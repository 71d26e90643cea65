//! Persistent store for the documentation set of one database: the offline
//! artifact a data provider authors, plus the benchmark queries with their
//! disambiguated forms and gold SQL. Files are plain JSON with stable key
//! order so humans can edit and diff them.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Schema;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("unknown documentation kind at line {line}, column {column}")]
    UnknownKind { line: usize, column: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid doc set: {location}: {message}")]
    Invalid { location: String, message: String },
    #[error("io error for {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    NameDescription,
    ValueConsistency,
    Coverage,
    Granularity,
}

impl DocKind {
    /// Name-description and value-consistency entries describe a column;
    /// coverage and granularity describe a whole table.
    pub fn is_column_scoped(self) -> bool {
        matches!(self, DocKind::NameDescription | DocKind::ValueConsistency)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Draft,
    Human,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub table: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl Scope {
    fn key(&self) -> (String, Option<String>) {
        (
            self.table.to_lowercase(),
            self.column.as_ref().map(|c| c.to_lowercase()),
        )
    }
}

/// One documentation fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEntry {
    pub id: String,
    pub kind: DocKind,
    pub scope: Scope,
    pub text: String,
    pub provenance: Provenance,
}

/// One benchmark query: the original natural-language text, its
/// disambiguated forms, and the gold SQL answer. Gold corrections are
/// applied in `gold_sql` with the original noted in `gold_fix_notes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub id: String,
    pub database_name: String,
    pub original_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_disambiguated_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_schema_clause: Option<String>,
    pub gold_sql: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_fix_notes: Option<String>,
}

/// All documentation and queries for one database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSet {
    pub database_name: String,
    pub entries: Vec<DocEntry>,
    #[serde(default)]
    pub queries: Vec<QuerySpec>,
}

impl DocSet {
    pub fn empty(database_name: impl Into<String>) -> Self {
        DocSet {
            database_name: database_name.into(),
            entries: Vec::new(),
            queries: Vec::new(),
        }
    }

    /// Conventional file name for this database's documentation.
    pub fn file_name(database_name: &str) -> String {
        format!("{database_name}.docs.json")
    }

    fn validate(&self) -> Result<(), DocError> {
        let mut seen = HashMap::new();
        for (i, entry) in self.entries.iter().enumerate() {
            let location = format!("entries[{i}] (id {:?})", entry.id);
            if entry.text.is_empty() {
                return Err(DocError::Invalid {
                    location,
                    message: "text must be non-empty".into(),
                });
            }
            if entry.kind.is_column_scoped() && entry.scope.column.is_none() {
                return Err(DocError::Invalid {
                    location,
                    message: format!("{:?} entries require a column scope", entry.kind),
                });
            }
            if !entry.kind.is_column_scoped() && entry.scope.column.is_some() {
                return Err(DocError::Invalid {
                    location,
                    message: format!("{:?} entries must not carry a column scope", entry.kind),
                });
            }
            if let Some(prev) = seen.insert(entry.id.clone(), i) {
                return Err(DocError::Invalid {
                    location,
                    message: format!("duplicate id (also used by entries[{prev}])"),
                });
            }
        }
        for (i, query) in self.queries.iter().enumerate() {
            let location = format!("queries[{i}] (id {:?})", query.id);
            if query.original_text.is_empty() || query.gold_sql.is_empty() {
                return Err(DocError::Invalid {
                    location,
                    message: "original_text and gold_sql must be non-empty".into(),
                });
            }
            if query.term_disambiguated_text.as_deref() == Some(query.original_text.as_str()) {
                return Err(DocError::Invalid {
                    location,
                    message: "term_disambiguated_text must differ from original_text".into(),
                });
            }
        }
        Ok(())
    }

    /// Checks every entry scope against a schema; returns one message per
    /// entry referencing a missing table or column.
    pub fn validate_scopes(&self, schema: &Schema) -> Vec<String> {
        let mut issues = Vec::new();
        for entry in &self.entries {
            match schema.table(&entry.scope.table) {
                None => issues.push(format!(
                    "entry {:?}: unknown table {:?}",
                    entry.id, entry.scope.table
                )),
                Some(table) => {
                    if let Some(col) = &entry.scope.column {
                        if table.column(col).is_none() {
                            issues.push(format!(
                                "entry {:?}: unknown column {:?}.{:?}",
                                entry.id, entry.scope.table, col
                            ));
                        }
                    }
                }
            }
        }
        issues
    }
}

/// Loads and validates a documentation file.
pub fn load_docs(path: impl AsRef<Path>) -> Result<DocSet, DocError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc_set: DocSet = serde_json::from_str(&content).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        if e.to_string().contains("unknown variant") {
            DocError::UnknownKind { line, column }
        } else {
            DocError::Parse {
                line,
                column,
                message: e.to_string(),
            }
        }
    })?;
    doc_set.validate()?;
    Ok(doc_set)
}

/// Validates and writes a documentation file. Serialization uses a fixed
/// field order and trailing newline so saves are byte-stable.
pub fn save_docs(doc_set: &DocSet, path: impl AsRef<Path>) -> Result<(), DocError> {
    let path = path.as_ref();
    doc_set.validate()?;
    let mut content = serde_json::to_string_pretty(doc_set).expect("doc set serializes");
    content.push('\n');
    std::fs::write(path, content).map_err(|source| DocError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Merges drafted entries into an existing set. Human entries always win at
/// equal (kind, scope); a new draft replaces an older draft for the same
/// (kind, scope) in place; everything else is appended. Idempotent. Callers
/// must pass entries with draft provenance; anything else is ignored.
pub fn merge_draft(existing: &DocSet, drafts: &[DocEntry]) -> DocSet {
    type Key = (DocKind, (String, Option<String>));
    let key = |e: &DocEntry| -> Key { (e.kind, e.scope.key()) };

    // Newest draft wins when the incoming batch itself repeats a scope.
    let mut incoming: Vec<DocEntry> = Vec::new();
    for draft in drafts.iter().filter(|d| d.provenance == Provenance::Draft) {
        incoming.retain(|d| key(d) != key(draft));
        incoming.push(draft.clone());
    }

    let human_keys: Vec<Key> = existing
        .entries
        .iter()
        .filter(|e| e.provenance == Provenance::Human)
        .map(key)
        .collect();
    incoming.retain(|d| !human_keys.contains(&key(d)));

    let mut entries: Vec<DocEntry> = Vec::new();
    let mut consumed: Vec<Key> = Vec::new();
    for entry in &existing.entries {
        if entry.provenance == Provenance::Draft {
            // A human entry at the same scope retires the draft entirely.
            if human_keys.contains(&key(entry)) {
                continue;
            }
            if let Some(replacement) = incoming.iter().find(|d| key(d) == key(entry)) {
                entries.push(replacement.clone());
                consumed.push(key(entry));
                continue;
            }
        }
        entries.push(entry.clone());
    }
    for draft in incoming {
        if !consumed.contains(&key(&draft)) {
            entries.push(draft);
        }
    }

    DocSet {
        database_name: existing.database_name.clone(),
        entries,
        queries: existing.queries.clone(),
    }
}

/// Entries of `kind` scoped to one of `tables`; column-scoped kinds are
/// additionally filtered to `columns` when given. Order follows the DocSet
/// (schema order for generated sets). The column filter is ignored for
/// table-scoped kinds.
pub fn docs_for<'a>(
    doc_set: &'a DocSet,
    kind: DocKind,
    tables: &[&str],
    columns: Option<&[&str]>,
) -> Vec<&'a DocEntry> {
    doc_set
        .entries
        .iter()
        .filter(|e| e.kind == kind)
        .filter(|e| {
            tables
                .iter()
                .any(|t| t.eq_ignore_ascii_case(&e.scope.table))
        })
        .filter(|e| {
            if !kind.is_column_scoped() {
                return true;
            }
            match (columns, &e.scope.column) {
                (None, _) => true,
                (Some(cols), Some(col)) => cols.iter().any(|c| c.eq_ignore_ascii_case(col)),
                (Some(_), None) => false,
            }
        })
        .collect()
}
