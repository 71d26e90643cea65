//! Prompt assembly for one (documentation level x query-disambiguation
//! level) cell. Two refinements keep prompts short: a model round selects up
//! to 5 columns and per-column documentation is provided only for those, and
//! the per-column family {samples, name descriptions, value consistency}
//! is never mixed - each level's member replaces the previous one.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docs::{docs_for, DocKind, DocSet, QuerySpec};
use crate::ingest::{RowSample, Schema};
use crate::llm::{CompletionClient, CompletionRequest, LlmError};

pub const DEFAULT_COLUMN_CAP: usize = 5;
pub const SAMPLE_ROWS: usize = 5;

/// Documentation levels in the order they build on each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocLevel {
    SchemaOnly,
    PlusSample,
    PlusNameDesc,
    PlusValueConsistency,
    PlusCoverage,
    PlusGranularity,
}

impl DocLevel {
    pub const ALL: [DocLevel; 6] = [
        DocLevel::SchemaOnly,
        DocLevel::PlusSample,
        DocLevel::PlusNameDesc,
        DocLevel::PlusValueConsistency,
        DocLevel::PlusCoverage,
        DocLevel::PlusGranularity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DocLevel::SchemaOnly => "schema_only",
            DocLevel::PlusSample => "plus_sample",
            DocLevel::PlusNameDesc => "plus_name_desc",
            DocLevel::PlusValueConsistency => "plus_value_consistency",
            DocLevel::PlusCoverage => "plus_coverage",
            DocLevel::PlusGranularity => "plus_granularity",
        }
    }

    /// Column selection is needed once per-column documentation appears.
    pub fn needs_column_selection(self) -> bool {
        self >= DocLevel::PlusNameDesc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryLevel {
    Original,
    OutputSchemaOnly,
    FullyDisambiguated,
}

impl QueryLevel {
    pub const ALL: [QueryLevel; 3] = [
        QueryLevel::Original,
        QueryLevel::OutputSchemaOnly,
        QueryLevel::FullyDisambiguated,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QueryLevel::Original => "original",
            QueryLevel::OutputSchemaOnly => "output_schema_only",
            QueryLevel::FullyDisambiguated => "fully_disambiguated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub system_text: String,
    pub schema_block: String,
    pub doc_blocks: Vec<(DocKind, String)>,
    pub sample_block: Option<String>,
    pub query_text: String,
    pub cot_instruction: String,
    pub selected_columns: Vec<ColumnRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromptWarning {
    /// A documentation kind required at this level has zero entries for the
    /// database; the prompt is still built.
    MissingDocs { kind: DocKind },
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("query {query_id} lacks the fields required for {level:?}")]
    MissingDisambiguation { query_id: String, level: QueryLevel },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("template error: {0}")]
    Template(String),
}

/// Prompt text templates. Built-in versions ship with the crate; a config
/// directory can override any of the four files.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub system: String,
    pub user: String,
    pub cot: String,
    pub column_select: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            system: include_str!("../templates/system.txt")
                .trim_end()
                .to_string(),
            user: include_str!("../templates/user.txt").trim_end().to_string(),
            cot: include_str!("../templates/cot.txt").trim_end().to_string(),
            column_select: include_str!("../templates/column_select.txt")
                .trim_end()
                .to_string(),
        }
    }
}

impl PromptTemplates {
    /// Loads overrides from a directory; files not present fall back to the
    /// built-in templates. Recognized names: system.txt, user.txt, cot.txt,
    /// column_select.txt.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut templates = PromptTemplates::default();
        for (name, slot) in [
            ("system.txt", &mut templates.system),
            ("user.txt", &mut templates.user),
            ("cot.txt", &mut templates.cot),
            ("column_select.txt", &mut templates.column_select),
        ] {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| PromptError::Template(format!("{}: {e}", path.display())))?
                    .trim_end()
                    .to_string();
            }
        }
        Ok(templates)
    }
}

impl Prompt {
    /// Renders the user-message text from the template. Placeholders:
    /// {schema_block}, {doc_blocks}, {sample_block}, {query_text},
    /// {cot_instruction}. Empty sections collapse.
    pub fn user_text(&self, templates: &PromptTemplates) -> String {
        let doc_blocks = self
            .doc_blocks
            .iter()
            .map(|(_, text)| text.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        let rendered = templates
            .user
            .replace("{schema_block}", &self.schema_block)
            .replace("{doc_blocks}", &doc_blocks)
            .replace("{sample_block}", self.sample_block.as_deref().unwrap_or(""))
            .replace("{query_text}", &self.query_text)
            .replace("{cot_instruction}", &self.cot_instruction);
        collapse_blank_runs(&rendered)
    }

    pub fn to_request(
        &self,
        templates: &PromptTemplates,
        model: &str,
        temperature: f64,
        max_tokens: u32,
    ) -> CompletionRequest {
        CompletionRequest {
            system_text: self.system_text.clone(),
            user_text: self.user_text(templates),
            model: model.to_string(),
            temperature,
            max_tokens,
        }
    }

    /// The structural invariants every assembled prompt must satisfy.
    pub fn check_invariants(&self, cap: usize) -> Result<(), String> {
        if self.selected_columns.len() > cap {
            return Err(format!(
                "{} selected columns exceed the cap of {cap}",
                self.selected_columns.len()
            ));
        }
        let families = [
            self.sample_block.is_some(),
            self.doc_blocks
                .iter()
                .any(|(k, _)| *k == DocKind::NameDescription),
            self.doc_blocks
                .iter()
                .any(|(k, _)| *k == DocKind::ValueConsistency),
        ];
        if families.iter().filter(|present| **present).count() > 1 {
            return Err(
                "more than one of samples / name descriptions / value consistency present".into(),
            );
        }
        Ok(())
    }
}

fn collapse_blank_runs(text: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    let mut blank_run = 0;
    for line in text.lines() {
        if line.trim().is_empty() {
            blank_run += 1;
            if blank_run > 1 {
                continue;
            }
            out.push("");
        } else {
            blank_run = 0;
            out.push(line);
        }
    }
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    while out.first().is_some_and(|l| l.is_empty()) {
        out.remove(0);
    }
    out.join("\n")
}

/// One line per table: name, columns with declared types, and key edges.
pub fn render_schema_block(schema: &Schema) -> String {
    let mut lines = Vec::new();
    for table in &schema.tables {
        let cols: Vec<String> = table
            .columns
            .iter()
            .map(|c| {
                if c.declared_type.is_empty() {
                    c.name.clone()
                } else {
                    format!("{} {}", c.name, c.declared_type)
                }
            })
            .collect();
        lines.push(format!("Table {} ({})", table.name, cols.join(", ")));
        if !table.primary_key.is_empty() {
            lines.push(format!("  primary key: {}", table.primary_key.join(", ")));
        }
        for fk in &table.foreign_keys {
            lines.push(format!(
                "  foreign key: {} -> {}.{}",
                fk.local_column, fk.foreign_table, fk.foreign_column
            ));
        }
    }
    lines.join("\n")
}

/// Pipe-separated preview of each table's first rows.
pub fn render_sample_block(schema: &Schema, samples: &[RowSample]) -> String {
    let mut sections = Vec::new();
    for sample in samples {
        let Some(table) = schema.table(&sample.table) else {
            continue;
        };
        let mut lines = vec![format!(
            "First {} rows of {}:",
            sample.rows.len(),
            table.name
        )];
        let header: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
        lines.push(header.join(" | "));
        for row in &sample.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            lines.push(cells.join(" | "));
        }
        sections.push(lines.join("\n"));
    }
    sections.join("\n\n")
}

/// Lenient parse of a column-selection response against the schema: names
/// match case-insensitively, `table.column` and bare spellings both work,
/// bullets and quotes are stripped, unknown names are dropped. More than
/// `cap` valid names keeps the first `cap` in model order; zero valid names
/// falls back to the first `cap` columns in schema order.
pub fn parse_column_selection(response: &str, schema: &Schema, cap: usize) -> Vec<ColumnRef> {
    let mut selected: Vec<ColumnRef> = Vec::new();
    for piece in response.split([',', '\n', ';']) {
        let cleaned = piece
            .trim()
            .trim_start_matches(|c: char| {
                c == '-' || c == '*' || c.is_ascii_digit() || c == '.' || c == ')'
            })
            .trim()
            .trim_matches(|c| c == '"' || c == '\'' || c == '`')
            .trim();
        if cleaned.is_empty() {
            continue;
        }
        let reference = match cleaned.split_once('.') {
            Some((table, column)) => schema
                .table(table.trim())
                .and_then(|t| t.column(column.trim()).map(|c| (t, c))),
            None => schema
                .all_columns()
                .find(|(_, c)| c.name.eq_ignore_ascii_case(cleaned)),
        };
        if let Some((table, column)) = reference {
            let column_ref = ColumnRef {
                table: table.name.clone(),
                column: column.name.clone(),
            };
            if !selected.contains(&column_ref) {
                selected.push(column_ref);
            }
        }
        if selected.len() == cap {
            break;
        }
    }
    if selected.is_empty() {
        selected = schema
            .all_columns()
            .take(cap)
            .map(|(t, c)| ColumnRef {
                table: t.name.clone(),
                column: c.name.clone(),
            })
            .collect();
    }
    selected
}

/// The exact request the column-selection round sends; exposed so replay
/// stores can be seeded with its hash.
#[allow(clippy::too_many_arguments)]
pub fn column_select_request(
    query_text: &str,
    schema: &Schema,
    templates: &PromptTemplates,
    model: &str,
    temperature: f64,
    max_tokens: u32,
    cap: usize,
) -> CompletionRequest {
    let user_text = templates
        .column_select
        .replace("{schema_block}", &render_schema_block(schema))
        .replace("{query_text}", query_text)
        .replace("{cap}", &cap.to_string());
    CompletionRequest {
        system_text: templates.system.clone(),
        user_text,
        model: model.to_string(),
        temperature,
        max_tokens,
    }
}

/// One model round that picks the columns worth documenting for a query.
#[allow(clippy::too_many_arguments)]
pub fn select_columns(
    query_text: &str,
    schema: &Schema,
    client: &CompletionClient,
    templates: &PromptTemplates,
    model: &str,
    temperature: f64,
    max_tokens: u32,
    cap: usize,
) -> Result<Vec<ColumnRef>, PromptError> {
    let request = column_select_request(
        query_text,
        schema,
        templates,
        model,
        temperature,
        max_tokens,
        cap,
    );
    let response = client.complete(&request)?;
    Ok(parse_column_selection(&response, schema, cap))
}

/// The per-level query text. Original is the untouched benchmark question;
/// the other levels append or substitute the human-authored refinements.
pub fn apply_query_disambiguation(
    spec: &QuerySpec,
    level: QueryLevel,
) -> Result<String, PromptError> {
    let missing = || PromptError::MissingDisambiguation {
        query_id: spec.id.clone(),
        level,
    };
    match level {
        QueryLevel::Original => Ok(spec.original_text.clone()),
        QueryLevel::OutputSchemaOnly => {
            let clause = spec.output_schema_clause.as_ref().ok_or_else(missing)?;
            Ok(format!("{} {}", spec.original_text, clause))
        }
        QueryLevel::FullyDisambiguated => {
            let text = spec.term_disambiguated_text.as_ref().ok_or_else(missing)?;
            let clause = spec.output_schema_clause.as_ref().ok_or_else(missing)?;
            Ok(format!("{text} {clause}"))
        }
    }
}

/// Assembles the prompt for one cell. Composition by level: schema only;
/// plus first-row samples; samples replaced by name descriptions for the
/// selected columns; those replaced by value-consistency entries; plus
/// coverage entries for all tables; plus granularity entries for all
/// tables. Missing documentation kinds produce warnings, never failures.
#[allow(clippy::too_many_arguments)]
pub fn assemble_prompt(
    schema: &Schema,
    doc_set: &DocSet,
    doc_level: DocLevel,
    query_level: QueryLevel,
    spec: &QuerySpec,
    selected_columns: &[ColumnRef],
    samples: &[RowSample],
    templates: &PromptTemplates,
) -> Result<(Prompt, Vec<PromptWarning>), PromptError> {
    let query_text = apply_query_disambiguation(spec, query_level)?;
    let mut warnings = Vec::new();
    let mut doc_blocks: Vec<(DocKind, String)> = Vec::new();
    let mut sample_block = None;

    let all_tables: Vec<&str> = schema.tables.iter().map(|t| t.name.as_str()).collect();

    if doc_level == DocLevel::PlusSample {
        sample_block = Some(render_sample_block(schema, samples));
    }

    // Per-column family: exactly one of samples / name descriptions /
    // value consistency survives at any level.
    let column_kind = match doc_level {
        DocLevel::PlusNameDesc => Some(DocKind::NameDescription),
        DocLevel::PlusValueConsistency | DocLevel::PlusCoverage | DocLevel::PlusGranularity => {
            Some(DocKind::ValueConsistency)
        }
        _ => None,
    };
    if let Some(kind) = column_kind {
        let mut added = 0;
        for reference in selected_columns {
            for entry in docs_for(
                doc_set,
                kind,
                &[reference.table.as_str()],
                Some(&[reference.column.as_str()]),
            ) {
                doc_blocks.push((kind, entry.text.clone()));
                added += 1;
            }
        }
        if added == 0 {
            warnings.push(PromptWarning::MissingDocs { kind });
        }
    }

    if doc_level >= DocLevel::PlusCoverage {
        let entries = docs_for(doc_set, DocKind::Coverage, &all_tables, None);
        if entries.is_empty() {
            warnings.push(PromptWarning::MissingDocs {
                kind: DocKind::Coverage,
            });
        }
        for entry in entries {
            doc_blocks.push((DocKind::Coverage, entry.text.clone()));
        }
    }
    if doc_level >= DocLevel::PlusGranularity {
        let entries = docs_for(doc_set, DocKind::Granularity, &all_tables, None);
        if entries.is_empty() {
            warnings.push(PromptWarning::MissingDocs {
                kind: DocKind::Granularity,
            });
        }
        for entry in entries {
            doc_blocks.push((DocKind::Granularity, entry.text.clone()));
        }
    }

    let prompt = Prompt {
        system_text: templates.system.clone(),
        schema_block: render_schema_block(schema),
        doc_blocks,
        sample_block,
        query_text,
        cot_instruction: templates.cot.clone(),
        selected_columns: selected_columns.to_vec(),
    };
    Ok((prompt, warnings))
}
