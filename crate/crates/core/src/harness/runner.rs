//! Cell and grid execution: select columns, assemble the prompt, complete,
//! extract SQL, canonicalize, classify, and record. Per-query failures are
//! recorded as Other with a stage tag and never abort a cell. Cells run
//! sequentially; queries within a cell run on up to `concurrency_cap`
//! worker threads, each with its own read-only database handle.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use crate::docs::{load_docs, DocSet, QuerySpec};
use crate::ingest::{extract_schema, open_database, sample_rows, RowSample, Schema};
use crate::llm::{CompletionClient, LiveConfig, RetryPolicy, TranscriptStore};
use crate::prompt::{
    apply_query_disambiguation, assemble_prompt, select_columns, ColumnRef, DocLevel,
    PromptTemplates, QueryLevel, SAMPLE_ROWS,
};
use crate::sql::{
    canonicalize_text_with, classify_error, execution_match, CanonicalizeOptions, ErrorClass,
};

use super::config::{BackendKind, ExperimentConfig};
use super::report::{emit_report, QueryRecord, Report};
use super::HarnessError;

struct DbContext {
    name: String,
    db_path: std::path::PathBuf,
    schema: Schema,
    doc_set: DocSet,
    samples: Vec<RowSample>,
}

struct GridContext {
    config: ExperimentConfig,
    templates: PromptTemplates,
    client: CompletionClient,
    databases: Vec<DbContext>,
}

fn build_client(config: &ExperimentConfig) -> Result<CompletionClient, HarnessError> {
    let transcript_dir = config
        .transcript_dir
        .as_ref()
        .expect("validated: transcript_dir present");
    let store = TranscriptStore::open(transcript_dir)?;
    match config.backend {
        BackendKind::Replay => Ok(CompletionClient::replay(store)),
        BackendKind::Live => {
            let endpoint = config
                .endpoint
                .clone()
                .expect("validated: endpoint present");
            let api_key = std::env::var(&config.api_key_env).unwrap_or_default();
            let live = LiveConfig {
                endpoint,
                api_key,
                retry: RetryPolicy {
                    max_retries: config.max_retries,
                    ..RetryPolicy::default()
                },
                in_flight_cap: config.concurrency_cap,
                timeout: Duration::from_secs(config.timeout_secs),
            };
            Ok(CompletionClient::live(live, store)?)
        }
    }
}

fn load_context(config: ExperimentConfig) -> Result<GridContext, HarnessError> {
    let templates = match &config.template_dir {
        Some(dir) => PromptTemplates::load_dir(dir)?,
        None => PromptTemplates::default(),
    };
    let client = build_client(&config)?;
    let mut databases = Vec::new();
    for db_config in &config.databases {
        let db = open_database(&db_config.db_path)?;
        let schema = extract_schema(&db)?;
        let doc_set = load_docs(&db_config.docs_path)?;
        let samples = schema
            .tables
            .iter()
            .map(|t| sample_rows(&db, &t.name, SAMPLE_ROWS))
            .collect::<Result<Vec<_>, _>>()?;
        databases.push(DbContext {
            name: db_config.name.clone(),
            db_path: db_config.db_path.clone(),
            schema,
            doc_set,
            samples,
        });
    }
    Ok(GridContext {
        config,
        templates,
        client,
        databases,
    })
}

/// Runs every (doc level, query level) cell, writes `report.json`,
/// `summary.csv`, `details.jsonl`, and `plotdata.csv` into the output
/// directory, and returns the report.
pub fn run_grid(config: ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let ctx = load_context(config)?;

    let mut records = Vec::new();
    for doc_level in &ctx.config.doc_levels {
        for query_level in &ctx.config.query_levels {
            records.extend(run_cell(&ctx, *doc_level, *query_level)?);
        }
    }

    let report = Report::from_records(&ctx.config.doc_levels, &ctx.config.query_levels, records);
    std::fs::create_dir_all(&ctx.config.output_dir).map_err(|source| HarnessError::Io {
        path: ctx.config.output_dir.clone(),
        source,
    })?;
    report.save(ctx.config.output_dir.join("report.json"))?;
    emit_report(&report, &ctx.config.output_dir)?;
    Ok(report)
}

fn run_cell(
    ctx: &GridContext,
    doc_level: DocLevel,
    query_level: QueryLevel,
) -> Result<Vec<QueryRecord>, HarnessError> {
    let mut cell_records = Vec::new();
    for db in &ctx.databases {
        let queries = &db.doc_set.queries;
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<QueryRecord>> = Mutex::new(Vec::with_capacity(queries.len()));
        let workers = ctx.config.concurrency_cap.min(queries.len()).max(1);

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| {
                    // One read-only handle per worker.
                    let exec_db = open_database(&db.db_path).ok();
                    loop {
                        let index = next.fetch_add(1, Ordering::SeqCst);
                        let Some(spec) = queries.get(index) else {
                            break;
                        };
                        let record =
                            run_query(ctx, db, exec_db.as_ref(), spec, doc_level, query_level);
                        results.lock().expect("results lock").push(record);
                    }
                });
            }
        });

        let mut records = results.into_inner().expect("results lock");
        records.sort_by(|a, b| (&a.database, &a.query_id).cmp(&(&b.database, &b.query_id)));
        cell_records.extend(records);
    }
    Ok(cell_records)
}

fn run_query(
    ctx: &GridContext,
    db: &DbContext,
    exec_db: Option<&crate::ingest::DatabaseHandle>,
    spec: &QuerySpec,
    doc_level: DocLevel,
    query_level: QueryLevel,
) -> QueryRecord {
    let mut record = QueryRecord {
        query_id: spec.id.clone(),
        database: db.name.clone(),
        doc_level,
        query_level,
        stage: "ok".into(),
        prompt_hash: None,
        selected_columns: Vec::new(),
        predicted_sql: None,
        class: ErrorClass::Other,
        exec_match: None,
        diagnostic: None,
    };
    let fail = |mut record: QueryRecord, stage: &str, diagnostic: String| {
        record.stage = stage.to_string();
        record.class = ErrorClass::Other;
        record.diagnostic = Some(diagnostic);
        record
    };

    let query_text = match apply_query_disambiguation(spec, query_level) {
        Ok(text) => text,
        Err(e) => return fail(record, "disambiguate", e.to_string()),
    };

    let selected: Vec<ColumnRef> = if doc_level.needs_column_selection() {
        match select_columns(
            &query_text,
            &db.schema,
            &ctx.client,
            &ctx.templates,
            &ctx.config.model,
            ctx.config.temperature,
            ctx.config.max_tokens,
            ctx.config.column_cap,
        ) {
            Ok(selected) => selected,
            Err(e) => return fail(record, "column_selection", e.to_string()),
        }
    } else {
        Vec::new()
    };
    record.selected_columns = selected.iter().map(ColumnRef::to_string).collect();

    let (prompt, warnings) = match assemble_prompt(
        &db.schema,
        &db.doc_set,
        doc_level,
        query_level,
        spec,
        &selected,
        &db.samples,
        &ctx.templates,
    ) {
        Ok(built) => built,
        Err(e) => return fail(record, "assemble", e.to_string()),
    };
    if !warnings.is_empty() {
        record.diagnostic = Some(format!("{warnings:?}"));
    }

    let request = prompt.to_request(
        &ctx.templates,
        &ctx.config.model,
        ctx.config.temperature,
        ctx.config.max_tokens,
    );
    record.prompt_hash = Some(request.request_hash());

    let response = match ctx.client.complete(&request) {
        Ok(response) => response,
        Err(e) => return fail(record, "completion", e.to_string()),
    };

    let predicted_sql = match crate::llm::extract_sql(&response) {
        Ok(sql) => sql,
        Err(e) => return fail(record, "extract", e.to_string()),
    };
    record.predicted_sql = Some(predicted_sql.clone());

    // Execution oracle runs whenever we have SQL text, regardless of
    // whether canonicalization succeeds.
    record.exec_match =
        exec_db.and_then(|db| execution_match(db, &predicted_sql, &spec.gold_sql).ok());

    let options = CanonicalizeOptions {
        case_insensitive_strings: ctx.config.case_insensitive_strings,
    };
    let gold = match canonicalize_text_with(&spec.gold_sql, options) {
        Ok(gold) => gold,
        Err(e) => return fail(record, "canonicalize_gold", e.to_string()),
    };
    let pred = match canonicalize_text_with(&predicted_sql, options) {
        Ok(pred) => pred,
        Err(e) => return fail(record, "canonicalize_pred", e.to_string()),
    };

    record.class = classify_error(&pred, &gold);
    record
}
