//! `dbdoc`: profile databases, draft and merge documentation, lint gold
//! answers, run experiment grids, and regenerate reports.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 run completed
//! with partial per-query failures.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dbdoc_core::docs::{load_docs, save_docs, DocSet};
use dbdoc_core::harness::{emit_report, run_grid, ExperimentConfig, Report};
use dbdoc_core::ingest::{extract_schema, import_csv, open_database};
use dbdoc_core::profile::{draft_documentation, profile_database};
use dbdoc_core::sql::lint_gold;

#[derive(Parser)]
#[command(
    name = "dbdoc",
    version,
    about = "Data-ambiguity documentation and Text-to-SQL evaluation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize RFC-4180 CSV files (header row required) into one SQLite
    /// database, one table per file named after the file stem.
    Import {
        /// Output database file to create.
        out_db: PathBuf,
        /// CSV files to import.
        #[arg(required = true)]
        csv_files: Vec<PathBuf>,
    },
    /// Profile every table: value-consistency patterns, coverage spans and
    /// domains, granularity. Prints JSON.
    Profile {
        db: PathBuf,
        /// Write the profiles to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draft documentation from profiles and merge it into a documentation
    /// file (human entries always win; drafts are regenerable).
    Docgen {
        db: PathBuf,
        /// Documentation file to create or update; defaults to
        /// `<database>.docs.json` next to the database file.
        #[arg(long)]
        docs: Option<PathBuf>,
        /// Database name recorded in a newly created file; defaults to the
        /// database file stem.
        #[arg(long)]
        database_name: Option<String>,
    },
    /// Lint the gold SQL of every query in a documentation file.
    Lint {
        db: PathBuf,
        /// Documentation file holding the queries; defaults to
        /// `<database>.docs.json` next to the database file.
        #[arg(long)]
        docs: Option<PathBuf>,
    },
    /// Run the experiment grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate summary.csv, details.jsonl, and plotdata.csv from the
    /// report.json in a run's output directory.
    Report { dir: PathBuf },
}

fn database_stem(db: &std::path::Path) -> String {
    db.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("database")
        .to_string()
}

fn default_docs_path(db: &std::path::Path, name: &str) -> PathBuf {
    let file = DocSet::file_name(name);
    match db.parent() {
        Some(parent) => parent.join(file),
        None => PathBuf::from(file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Import { out_db, csv_files } => {
            let tables: Vec<(String, PathBuf)> = csv_files
                .iter()
                .map(|path| {
                    let stem = path
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .map(str::to_string)
                        .with_context(|| {
                            format!("cannot derive table name from {}", path.display())
                        })?;
                    Ok((stem, path.clone()))
                })
                .collect::<Result<_>>()?;
            import_csv(&out_db, &tables)?;
            println!(
                "imported {} table(s) into {}",
                tables.len(),
                out_db.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile { db, output } => {
            let handle = open_database(&db)?;
            let (formats, coverages, granularities) = profile_database(&handle)?;
            let json = serde_json::json!({
                "format_profiles": formats,
                "coverage_profiles": coverages,
                "granularity_profiles": granularities,
            });
            let rendered = serde_json::to_string_pretty(&json)?;
            match output {
                Some(path) => std::fs::write(&path, rendered + "\n")
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{rendered}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Docgen {
            db,
            docs,
            database_name,
        } => {
            let name = database_name.unwrap_or_else(|| database_stem(&db));
            let docs = docs.unwrap_or_else(|| default_docs_path(&db, &name));
            let handle = open_database(&db)?;
            let schema = extract_schema(&handle)?;
            let (formats, coverages, granularities) = profile_database(&handle)?;
            let drafts = draft_documentation(&schema, &formats, &coverages, &granularities);
            let existing = if docs.exists() {
                load_docs(&docs)?
            } else {
                DocSet::empty(name)
            };
            let merged = dbdoc_core::docs::merge_draft(&existing, &drafts);
            save_docs(&merged, &docs)?;
            let scope_issues = merged.validate_scopes(&schema);
            for issue in &scope_issues {
                eprintln!("warning: {issue}");
            }
            println!(
                "wrote {} ({} entries, {} queries)",
                docs.display(),
                merged.entries.len(),
                merged.queries.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Lint { db, docs } => {
            let docs = docs.unwrap_or_else(|| default_docs_path(&db, &database_stem(&db)));
            let handle = open_database(&db)?;
            let doc_set = load_docs(&docs)?;
            let mut warned = false;
            for query in &doc_set.queries {
                match lint_gold(&query.gold_sql, Some(&handle)) {
                    Ok(warnings) => {
                        for warning in warnings {
                            warned = true;
                            println!("{}: {}", query.id, warning);
                        }
                    }
                    Err(e) => {
                        warned = true;
                        println!("{}: gold does not parse: {}", query.id, e);
                    }
                }
            }
            if !warned {
                println!("no warnings");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let output_dir = config.output_dir.clone();
            let report = run_grid(config)?;
            for cell in &report.cells {
                let accuracy = if cell.accuracy.is_some() {
                    format!("{}%", cell.accuracy_percent())
                } else {
                    "n/a".to_string()
                };
                println!(
                    "{}/{}: {}/{} correct ({})",
                    cell.doc_level.label(),
                    cell.query_level.label(),
                    cell.correct,
                    cell.total,
                    accuracy
                );
            }
            println!("report written to {}", output_dir.display());
            if report.has_pipeline_failures() {
                eprintln!("warning: some queries failed before classification (see details.jsonl)");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let report = Report::load(dir.join("report.json"))?;
            let paths = emit_report(&report, &dir)?;
            for path in paths {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
