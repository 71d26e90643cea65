//! Drafts the three data-ambiguity documentation types (value consistency,
//! data coverage, data granularity) directly from the data. Profiles are
//! drafts for a human to review, never authoritative documentation.

use std::collections::BTreeMap;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docs::{DocEntry, DocKind, Provenance, Scope};
use crate::ingest::{self, DatabaseHandle, IngestError, Schema, Value};

/// Column names whose tokens equal one of these suggest pre-aggregated data.
pub const AGGREGATE_HINT_TOKENS: &[&str] = &["count", "total", "sum", "avg"];

/// Columns with at most this many distinct values get a categorical domain.
pub const CATEGORICAL_DOMAIN_THRESHOLD: usize = 20;

pub const PATTERN_EMPTY: &str = "<empty>";
pub const PATTERN_MIXED: &str = "<mixed>";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Value-consistency profile of one column: the dominant generalized token
/// pattern and the values that deviate from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatProfile {
    pub table: String,
    pub column: String,
    pub pattern: String,
    pub conforming_count: usize,
    /// (value, 0-based position in the scanned stream). Positions count
    /// nulls so they locate the offending row.
    pub outliers: Vec<(String, usize)>,
    pub null_count: usize,
}

/// Coverage profile of one table: how many rows, which time range each
/// temporal column spans (year resolution), and the full domain of
/// low-cardinality columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageProfile {
    pub table: String,
    pub row_count: usize,
    pub temporal_spans: BTreeMap<String, (i32, i32)>,
    pub categorical_domains: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GranularityVerdict {
    LikelyRawEvents,
    LikelyAggregated,
    Unknown,
}

/// Granularity profile of one table: duplicate-row ratio, minimal candidate
/// keys of size <= 2, and a drafted raw-vs-aggregated verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityProfile {
    pub table: String,
    pub duplicate_row_ratio: f64,
    pub candidate_keys: Vec<Vec<String>>,
    pub verdict_draft: GranularityVerdict,
}

/// Generalizes one value: digit runs become `<num>`, letter runs `<word>`,
/// every other character stays literal.
pub fn generalize_value(value: &str) -> String {
    #[derive(PartialEq)]
    enum Run {
        None,
        Digit,
        Letter,
    }
    let mut out = String::new();
    let mut run = Run::None;
    for ch in value.chars() {
        if ch.is_ascii_digit() {
            if run != Run::Digit {
                out.push_str("<num>");
                run = Run::Digit;
            }
        } else if ch.is_alphabetic() {
            if run != Run::Letter {
                out.push_str("<word>");
                run = Run::Letter;
            }
        } else {
            out.push(ch);
            run = Run::None;
        }
    }
    out
}

/// Infers the dominant token pattern of a value stream. Nulls are skipped
/// and counted separately. When no single pattern covers at least half of
/// the non-null values the sentinel `<mixed>` is returned and every value
/// conforms vacuously; an empty stream yields `<empty>`.
pub fn infer_format(table: &str, column: &str, values: &[Value]) -> FormatProfile {
    let mut null_count = 0usize;
    // (pattern -> count), first-seen order retained for deterministic ties.
    let mut counts: Vec<(String, usize)> = Vec::new();
    let mut rendered: Vec<Option<(String, String)>> = Vec::with_capacity(values.len());
    for value in values {
        match value.as_text() {
            None => {
                null_count += 1;
                rendered.push(None);
            }
            Some(text) => {
                let pattern = generalize_value(&text);
                match counts.iter_mut().find(|(p, _)| *p == pattern) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((pattern.clone(), 1)),
                }
                rendered.push(Some((text, pattern)));
            }
        }
    }
    let non_null = rendered.iter().flatten().count();
    if non_null == 0 {
        return FormatProfile {
            table: table.to_string(),
            column: column.to_string(),
            pattern: PATTERN_EMPTY.to_string(),
            conforming_count: 0,
            outliers: Vec::new(),
            null_count,
        };
    }
    let (best_pattern, best_count) = counts
        .iter()
        .max_by_key(|(_, n)| *n)
        .map(|(p, n)| (p.clone(), *n))
        .expect("non-empty counts");
    // The dominant pattern must cover at least half of the non-null values.
    if best_count * 2 < non_null {
        return FormatProfile {
            table: table.to_string(),
            column: column.to_string(),
            pattern: PATTERN_MIXED.to_string(),
            conforming_count: non_null,
            outliers: Vec::new(),
            null_count,
        };
    }
    let mut outliers = Vec::new();
    for (idx, entry) in rendered.iter().enumerate() {
        if let Some((text, pattern)) = entry {
            if *pattern != best_pattern {
                outliers.push((text.clone(), idx));
            }
        }
    }
    FormatProfile {
        table: table.to_string(),
        column: column.to_string(),
        pattern: best_pattern,
        conforming_count: non_null - outliers.len(),
        outliers,
        null_count,
    }
}

/// Parses a value as a year range: a 4-digit year, an ISO date (year taken),
/// or a "YYYY/YYYY" season (both endpoint years).
fn year_range(text: &str) -> Option<(i32, i32)> {
    let t = text.trim();
    if let Ok(y) = t.parse::<i32>() {
        if (1000..=9999).contains(&y) {
            return Some((y, y));
        }
        return None;
    }
    if let Some((a, b)) = t.split_once('/') {
        let (a, b) = (a.parse::<i32>().ok()?, b.parse::<i32>().ok()?);
        if (1000..=9999).contains(&a) && (1000..=9999).contains(&b) && a <= b {
            return Some((a, b));
        }
        return None;
    }
    // ISO date: YYYY-MM-DD, optionally followed by a time component.
    let bytes = t.as_bytes();
    if bytes.len() >= 10
        && bytes[4] == b'-'
        && bytes[7] == b'-'
        && t[..4].chars().all(|c| c.is_ascii_digit())
        && t[5..7].chars().all(|c| c.is_ascii_digit())
        && t[8..10].chars().all(|c| c.is_ascii_digit())
    {
        let y = t[..4].parse::<i32>().ok()?;
        let m = t[5..7].parse::<u32>().ok()?;
        let d = t[8..10].parse::<u32>().ok()?;
        if (1..=12).contains(&m) && (1..=31).contains(&d) {
            return Some((y, y));
        }
    }
    None
}

/// Computes row count, temporal spans, and categorical domains for a table.
/// A column gets a span only when every non-null value parses as a year,
/// ISO date, or season; nulls never contribute.
pub fn profile_coverage(db: &DatabaseHandle, table: &str) -> Result<CoverageProfile, ProfileError> {
    let schema = ingest::extract_schema(db)?;
    let def = schema
        .table(table)
        .ok_or_else(|| IngestError::UnknownTable(table.to_string()))?;
    let row_count = db.row_count(&def.name)?;
    let mut temporal_spans = BTreeMap::new();
    let mut categorical_domains = BTreeMap::new();
    for col in &def.columns {
        let values = ingest::column_values(db, &def.name, &col.name, None)?;
        let texts: Vec<String> = values.iter().filter_map(|v| v.as_text()).collect();
        if !texts.is_empty() {
            let ranges: Vec<(i32, i32)> = texts.iter().filter_map(|t| year_range(t)).collect();
            if ranges.len() == texts.len() {
                let min = ranges.iter().map(|(a, _)| *a).min().expect("non-empty");
                let max = ranges.iter().map(|(_, b)| *b).max().expect("non-empty");
                temporal_spans.insert(col.name.clone(), (min, max));
            }
        }
        let distinct: HashSet<&String> = texts.iter().collect();
        if !distinct.is_empty() && distinct.len() <= CATEGORICAL_DOMAIN_THRESHOLD {
            let mut domain: Vec<String> = distinct.into_iter().cloned().collect();
            domain.sort();
            categorical_domains.insert(col.name.clone(), domain);
        }
    }
    Ok(CoverageProfile {
        table: def.name.clone(),
        row_count,
        temporal_spans,
        categorical_domains,
    })
}

fn name_has_aggregate_hint(name: &str) -> bool {
    name.to_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .any(|token| AGGREGATE_HINT_TOKENS.contains(&token))
}

/// Computes the duplicate-row ratio, minimal candidate keys over column
/// subsets of size <= 2, and a drafted granularity verdict. NULLs compare
/// equal for the uniqueness check (matching SELECT DISTINCT semantics).
pub fn profile_granularity(
    db: &DatabaseHandle,
    table: &str,
) -> Result<GranularityProfile, ProfileError> {
    let schema = ingest::extract_schema(db)?;
    let def = schema
        .table(table)
        .ok_or_else(|| IngestError::UnknownTable(table.to_string()))?;
    let total = db.row_count(&def.name)?;

    let quote = |name: &str| format!("\"{}\"", name.replace('"', "\"\""));
    let distinct_over = |cols: &[&str]| -> Result<usize, ProfileError> {
        let list = cols.iter().map(|c| quote(c)).collect::<Vec<_>>().join(", ");
        let sql = format!(
            "SELECT count(*) FROM (SELECT DISTINCT {list} FROM {})",
            quote(&def.name)
        );
        let n: i64 = db
            .connection()
            .query_row(&sql, [], |row| row.get(0))
            .map_err(IngestError::Sqlite)?;
        Ok(n as usize)
    };

    let duplicate_row_ratio = if total == 0 {
        0.0
    } else {
        let all: Vec<&str> = def.columns.iter().map(|c| c.name.as_str()).collect();
        let distinct = distinct_over(&all)?;
        1.0 - distinct as f64 / total as f64
    };

    let names: Vec<&str> = def.columns.iter().map(|c| c.name.as_str()).collect();
    let mut single_keys: Vec<usize> = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if distinct_over(&[name])? == total {
            single_keys.push(i);
        }
    }
    let mut candidate_keys: Vec<Vec<String>> = single_keys
        .iter()
        .map(|&i| vec![names[i].to_string()])
        .collect();
    // Pairs are reported only when minimal: neither member is already a key.
    for i in 0..names.len() {
        if single_keys.contains(&i) {
            continue;
        }
        for j in (i + 1)..names.len() {
            if single_keys.contains(&j) {
                continue;
            }
            if distinct_over(&[names[i], names[j]])? == total {
                candidate_keys.push(vec![names[i].to_string(), names[j].to_string()]);
            }
        }
    }

    let has_hint = names.iter().any(|n| name_has_aggregate_hint(n));
    let has_small_key = !candidate_keys.is_empty();
    let verdict_draft = if has_hint && has_small_key {
        GranularityVerdict::LikelyAggregated
    } else if duplicate_row_ratio == 0.0 && !has_hint {
        GranularityVerdict::LikelyRawEvents
    } else {
        GranularityVerdict::Unknown
    };

    Ok(GranularityProfile {
        table: def.name.clone(),
        duplicate_row_ratio,
        candidate_keys,
        verdict_draft,
    })
}

/// Format profiles for every column plus coverage and granularity profiles
/// for every table, in schema order.
pub type DatabaseProfiles = (
    Vec<FormatProfile>,
    Vec<CoverageProfile>,
    Vec<GranularityProfile>,
);

/// Profiles every column and table of a database in schema order.
pub fn profile_database(db: &DatabaseHandle) -> Result<DatabaseProfiles, ProfileError> {
    let schema = ingest::extract_schema(db)?;
    let mut formats = Vec::new();
    let mut coverages = Vec::new();
    let mut granularities = Vec::new();
    for table in &schema.tables {
        for col in &table.columns {
            let values = ingest::column_values(db, &table.name, &col.name, None)?;
            formats.push(infer_format(&table.name, &col.name, &values));
        }
        coverages.push(profile_coverage(db, &table.name)?);
        granularities.push(profile_granularity(db, &table.name)?);
    }
    Ok((formats, coverages, granularities))
}

fn format_doc_text(profile: &FormatProfile) -> String {
    let outliers = if profile.outliers.is_empty() {
        "none".to_string()
    } else {
        profile
            .outliers
            .iter()
            .map(|(v, _)| format!("'{v}'"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "Values in {} consistently follow '{}'. Outliers: {}.",
        profile.column, profile.pattern, outliers
    )
}

fn coverage_doc_text(profile: &CoverageProfile) -> String {
    if profile.temporal_spans.is_empty() {
        format!("{} contains {} rows.", profile.table, profile.row_count)
    } else {
        profile
            .temporal_spans
            .iter()
            .map(|(col, (min, max))| {
                format!(
                    "{} covers rows with {} from {} to {}.",
                    profile.table, col, min, max
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn granularity_doc_text(profile: &GranularityProfile) -> String {
    match profile.verdict_draft {
        GranularityVerdict::LikelyRawEvents => format!(
            "Each row in '{}' reports one raw event; no duplicate rows were found. \
             It is not aggregated.",
            profile.table
        ),
        GranularityVerdict::LikelyAggregated => {
            let key = profile
                .candidate_keys
                .first()
                .map(|k| k.join(", "))
                .unwrap_or_default();
            format!(
                "Each row in '{}' appears to be an aggregate grouped by ({}); \
                 column names suggest aggregated measures.",
                profile.table, key
            )
        }
        GranularityVerdict::Unknown => format!(
            "Each row in '{}' may be a raw event or an aggregate; the data alone \
             is inconclusive. Review required.",
            profile.table
        ),
    }
}

/// Turns profiles into draft documentation entries: one value-consistency
/// entry per profiled column plus one coverage and one granularity entry per
/// table, in schema order. Deterministic; all entries carry draft provenance.
pub fn draft_documentation(
    schema: &Schema,
    format_profiles: &[FormatProfile],
    coverage_profiles: &[CoverageProfile],
    granularity_profiles: &[GranularityProfile],
) -> Vec<DocEntry> {
    let mut entries = Vec::new();
    for table in &schema.tables {
        for col in &table.columns {
            let Some(profile) = format_profiles
                .iter()
                .find(|p| p.table == table.name && p.column == col.name)
            else {
                continue;
            };
            entries.push(DocEntry {
                id: format!("draft-value-consistency-{}-{}", table.name, col.name),
                kind: DocKind::ValueConsistency,
                scope: Scope {
                    table: table.name.clone(),
                    column: Some(col.name.clone()),
                },
                text: format_doc_text(profile),
                provenance: Provenance::Draft,
            });
        }
        if let Some(profile) = coverage_profiles.iter().find(|p| p.table == table.name) {
            entries.push(DocEntry {
                id: format!("draft-coverage-{}", table.name),
                kind: DocKind::Coverage,
                scope: Scope {
                    table: table.name.clone(),
                    column: None,
                },
                text: coverage_doc_text(profile),
                provenance: Provenance::Draft,
            });
        }
        if let Some(profile) = granularity_profiles.iter().find(|p| p.table == table.name) {
            entries.push(DocEntry {
                id: format!("draft-granularity-{}", table.name),
                kind: DocKind::Granularity,
                scope: Scope {
                    table: table.name.clone(),
                    column: None,
                },
                text: granularity_doc_text(profile),
                provenance: Provenance::Draft,
            });
        }
    }
    entries
}
