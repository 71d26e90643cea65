//! Benchmarks for the hot paths: format inference over large value streams,
//! SQL parse + canonicalize, exact match, classification, and table
//! profiling on the bundled example database.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use dbdoc_core::fixtures;
use dbdoc_core::ingest::{open_database, Value};
use dbdoc_core::profile::{infer_format, profile_granularity};
use dbdoc_core::sql::{canonicalize_text, classify_error, exact_match, parse_sql};

fn format_inference(c: &mut Criterion) {
    let values: Vec<Value> = (0..10_000)
        .map(|i| match i % 20 {
            0 => Value::Null,
            1 => Value::Text(format!("{}", 2000 + i % 14)),
            _ => Value::Text(format!("Team{} - Team{}", i % 7, (i + 3) % 7)),
        })
        .collect();
    c.bench_function("infer_format_10k_values", |b| {
        b.iter(|| infer_format("betfront", "match", black_box(&values)))
    });
}

const QUERIES: &[&str] = &[
    "SELECT YEAR FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1",
    "SELECT b.match, f.season FROM betfront b JOIN football_data f ON b.country = f.country \
     WHERE b.year > 2010 AND f.bwd IS NOT NULL ORDER BY b.datetime",
    "SELECT country, count(*) AS n FROM betfront WHERE match LIKE '%Malta%' \
     GROUP BY country HAVING count(*) > 1 ORDER BY n DESC",
    "SELECT country FROM betfront UNION SELECT country FROM football_data",
];

fn parse_and_canonicalize(c: &mut Criterion) {
    c.bench_function("parse_sql", |b| {
        b.iter(|| {
            for sql in QUERIES {
                black_box(parse_sql(black_box(sql)).unwrap());
            }
        })
    });
    c.bench_function("canonicalize_text", |b| {
        b.iter(|| {
            for sql in QUERIES {
                black_box(canonicalize_text(black_box(sql)).unwrap());
            }
        })
    });
}

fn matching_and_classification(c: &mut Criterion) {
    let gold = canonicalize_text(QUERIES[0]).unwrap();
    let pred = canonicalize_text(
        "select year, count(*) from BETFRONT group by year order by count(*) desc limit 1",
    )
    .unwrap();
    c.bench_function("exact_match", |b| {
        b.iter(|| black_box(exact_match(black_box(&pred), black_box(&gold))))
    });
    c.bench_function("classify_error", |b| {
        b.iter(|| black_box(classify_error(black_box(&pred), black_box(&gold))))
    });
}

fn granularity_profiling(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let db = open_database(fixtures::example_database(dir.path())).unwrap();
    c.bench_function("profile_granularity_betfront", |b| {
        b.iter(|| profile_granularity(black_box(&db), "betfront").unwrap())
    });
}

criterion_group!(
    benches,
    format_inference,
    parse_and_canonicalize,
    matching_and_classification,
    granularity_profiling
);
criterion_main!(benches);
