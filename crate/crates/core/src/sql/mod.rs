//! SQL evaluation: parsing, canonicalization, exact match, an execution
//! oracle, gold linting, and the error taxonomy.
//!
//! Exact match compares canonical forms component-wise and is deliberately
//! conservative: constructs outside the supported dialect subset raise
//! [`SqlError::Unsupported`] and the pair lands in the Other class with a
//! diagnostic, while the execution oracle still covers it.

mod ast;
mod canonical;
mod classify;
mod execute;
mod lexer;
mod lint;
mod parser;

use thiserror::Error;

pub use ast::{SetOperator, Statement};
pub use canonical::{CanonicalPred, CanonicalQuery, OrderDirection, PredShape};
pub use classify::{classify_error, ErrorClass};
pub use execute::{execution_match, ExecError, ExecSide};
pub use lint::{lint_gold, GoldLint};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SqlError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported construct: {construct}")]
    Unsupported { construct: String },
}

/// Knobs for canonicalization. Strict is the default: string literals keep
/// their case, so value-matching differences stay visible to the Fuzzy
/// class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CanonicalizeOptions {
    /// Fold string literals to lowercase before comparison.
    pub case_insensitive_strings: bool,
}

/// Parses one statement of the supported dialect subset.
pub fn parse_sql(text: &str) -> Result<Statement, SqlError> {
    parser::parse_statement(text)
}

/// Canonicalizes a parsed statement. Idempotent:
/// `canonicalize(parse(c.to_sql()))` equals `c`.
pub fn canonicalize(stmt: &Statement) -> Result<CanonicalQuery, SqlError> {
    canonical::canonicalize(stmt)
}

/// Canonicalizes with explicit options.
pub fn canonicalize_with(
    stmt: &Statement,
    options: CanonicalizeOptions,
) -> Result<CanonicalQuery, SqlError> {
    if options.case_insensitive_strings {
        let mut folded = stmt.clone();
        fold::lowercase_string_literals(&mut folded.query);
        canonical::canonicalize(&folded)
    } else {
        canonical::canonicalize(stmt)
    }
}

/// Parse + canonicalize in one step.
pub fn canonicalize_text(text: &str) -> Result<CanonicalQuery, SqlError> {
    canonicalize(&parse_sql(text)?)
}

/// Parse + canonicalize with explicit options.
pub fn canonicalize_text_with(
    text: &str,
    options: CanonicalizeOptions,
) -> Result<CanonicalQuery, SqlError> {
    canonicalize_with(&parse_sql(text)?, options)
}

mod fold {
    use super::ast::*;

    pub fn lowercase_string_literals(query: &mut Query) {
        let mut cores = vec![&mut query.first];
        cores.extend(query.set_tail.iter_mut().map(|(_, core)| core));
        for core in cores {
            for item in &mut core.items {
                if let SelectItem::Expr { expr, .. } = item {
                    fold_expr(expr);
                }
            }
            if let Some(where_clause) = &mut core.where_clause {
                fold_expr(where_clause);
            }
            for expr in &mut core.group_by {
                fold_expr(expr);
            }
            if let Some(having) = &mut core.having {
                fold_expr(having);
            }
        }
        for item in &mut query.order_by {
            fold_expr(&mut item.expr);
        }
    }

    fn fold_expr(expr: &mut Expr) {
        match expr {
            Expr::Str(s) => *s = s.to_lowercase(),
            Expr::Neg(e) | Expr::Not(e) => fold_expr(e),
            Expr::Binary { left, right, .. } => {
                fold_expr(left);
                fold_expr(right);
            }
            Expr::Function { args, .. } => args.iter_mut().for_each(fold_expr),
            Expr::IsNull { expr, .. } => fold_expr(expr),
            Expr::Like { expr, pattern, .. } => {
                fold_expr(expr);
                fold_expr(pattern);
            }
            Expr::InList { expr, items, .. } => {
                fold_expr(expr);
                items.iter_mut().for_each(fold_expr);
            }
            Expr::InSubquery { expr, query, .. } => {
                fold_expr(expr);
                lowercase_string_literals(query);
            }
            Expr::Between {
                expr, low, high, ..
            } => {
                fold_expr(expr);
                fold_expr(low);
                fold_expr(high);
            }
            Expr::Exists { query, .. } => lowercase_string_literals(query),
            Expr::Subquery(query) => lowercase_string_literals(query),
            Expr::Column { .. } | Expr::Number(_) | Expr::Null => {}
        }
    }
}

/// Component-wise equality of canonical queries. See [`CanonicalQuery`] for
/// the comparison semantics of each component.
pub fn exact_match(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    canonical::exact_match(pred, gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(sql: &str) -> CanonicalQuery {
        canonicalize_text(sql).unwrap_or_else(|e| panic!("{sql:?}: {e}"))
    }

    fn matches(a: &str, b: &str) -> bool {
        exact_match(&canon(a), &canon(b))
    }

    const EXAMPLE_GOLD: &str =
        "SELECT YEAR FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1";

    #[test]
    fn example_gold_canonical_components() {
        let c = canon(EXAMPLE_GOLD);
        assert_eq!(c.select_items, vec!["betfront.year"]);
        assert!(c.group_by.contains("betfront.year"));
        assert_eq!(
            c.order_by,
            vec![("count(*)".to_string(), OrderDirection::Desc)]
        );
        assert_eq!(c.limit, Some(1));
    }

    #[test]
    fn case_folding_makes_queries_equal() {
        assert!(matches(
            "select YEAR from Betfront",
            "SELECT year FROM betfront"
        ));
    }

    #[test]
    fn table_alias_is_inlined() {
        assert!(matches(
            "SELECT b.year FROM betfront AS b",
            "SELECT year FROM betfront"
        ));
        assert!(matches(
            "SELECT b.year FROM betfront b WHERE b.year > 2010",
            "SELECT betfront.year FROM betfront WHERE year > 2010"
        ));
    }

    #[test]
    fn commutative_predicates_reorder() {
        assert!(matches(
            "SELECT * FROM t WHERE a = 1 AND b = 2",
            "SELECT * FROM t WHERE b = 2 AND a = 1"
        ));
        assert!(matches(
            "SELECT * FROM t WHERE a = 1",
            "SELECT * FROM t WHERE 1 = a"
        ));
        assert!(matches(
            "SELECT * FROM t WHERE a > 1",
            "SELECT * FROM t WHERE 1 < a"
        ));
    }

    #[test]
    fn or_operands_reorder_within_predicate() {
        assert!(matches(
            "SELECT * FROM t WHERE a = 1 OR b = 2",
            "SELECT * FROM t WHERE b = 2 OR a = 1"
        ));
    }

    #[test]
    fn numeric_literals_normalize() {
        assert!(matches(
            "SELECT * FROM t WHERE x = 1.0",
            "SELECT * FROM t WHERE x = 1"
        ));
        assert!(matches(
            "SELECT * FROM t WHERE x = .5",
            "SELECT * FROM t WHERE x = 0.5"
        ));
    }

    #[test]
    fn distinct_in_count_is_semantic() {
        assert!(!matches(
            "SELECT count(match) FROM betfront",
            "SELECT count(DISTINCT match) FROM betfront"
        ));
    }

    #[test]
    fn extra_select_column_breaks_match() {
        let with_extra =
            "SELECT YEAR, count(*) FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1";
        assert!(!matches(EXAMPLE_GOLD, with_extra));
    }

    #[test]
    fn empty_string_is_not_null_check() {
        assert!(!matches(
            "SELECT * FROM t WHERE x = ''",
            "SELECT * FROM t WHERE x IS NULL"
        ));
        // Double-quoted empty string behaves like the single-quoted one.
        assert!(matches(
            "SELECT * FROM t WHERE x = \"\"",
            "SELECT * FROM t WHERE x = ''"
        ));
    }

    #[test]
    fn string_literals_stay_case_sensitive() {
        assert!(!matches(
            "SELECT * FROM t WHERE c = 'Malta'",
            "SELECT * FROM t WHERE c = 'malta'"
        ));
    }

    #[test]
    fn string_case_flag_relaxes_literal_comparison() {
        let relaxed = CanonicalizeOptions {
            case_insensitive_strings: true,
        };
        let a = canonicalize_text_with("SELECT * FROM t WHERE c = 'Malta'", relaxed).unwrap();
        let b = canonicalize_text_with("SELECT * FROM t WHERE c = 'MALTA'", relaxed).unwrap();
        assert!(exact_match(&a, &b));
        // Strict stays the default.
        assert!(!CanonicalizeOptions::default().case_insensitive_strings);
        let strict_a = canonicalize_text_with(
            "SELECT * FROM t WHERE c = 'Malta'",
            CanonicalizeOptions::default(),
        )
        .unwrap();
        let strict_b = canonicalize_text_with(
            "SELECT * FROM t WHERE c = 'MALTA'",
            CanonicalizeOptions::default(),
        )
        .unwrap();
        assert!(!exact_match(&strict_a, &strict_b));
    }

    #[test]
    fn select_list_is_an_unordered_multiset() {
        assert!(matches("SELECT a, b FROM t", "SELECT b, a FROM t"));
        assert!(!matches("SELECT a, a FROM t", "SELECT a FROM t"));
        assert!(matches("SELECT a, a FROM t", "SELECT a, a FROM t"));
    }

    #[test]
    fn order_by_stays_ordered() {
        assert!(!matches(
            "SELECT a, b FROM t ORDER BY a, b",
            "SELECT a, b FROM t ORDER BY b, a"
        ));
        assert!(matches(
            "SELECT a FROM t ORDER BY a ASC",
            "SELECT a FROM t ORDER BY a"
        ));
    }

    #[test]
    fn inner_join_on_equals_comma_where() {
        assert!(matches(
            "SELECT * FROM a JOIN b ON a.x = b.y",
            "SELECT * FROM a, b WHERE a.x = b.y"
        ));
        assert!(matches(
            "SELECT * FROM a JOIN b ON a.x = b.y",
            "SELECT * FROM b JOIN a ON b.y = a.x"
        ));
    }

    #[test]
    fn left_join_is_structural() {
        assert!(!matches(
            "SELECT * FROM a LEFT JOIN b ON a.x = b.y",
            "SELECT * FROM a JOIN b ON a.x = b.y"
        ));
        assert!(matches(
            "SELECT * FROM a LEFT JOIN b ON a.x = b.y",
            "SELECT * FROM a LEFT OUTER JOIN b ON b.y = a.x"
        ));
    }

    #[test]
    fn order_by_ordinal_and_alias_resolve() {
        assert!(matches(
            "SELECT year y FROM betfront ORDER BY y",
            "SELECT year FROM betfront ORDER BY year"
        ));
        assert!(matches(
            "SELECT year FROM betfront ORDER BY 1",
            "SELECT year FROM betfront ORDER BY year"
        ));
        assert!(matches(
            "SELECT country, count(*) AS n FROM betfront GROUP BY 1 ORDER BY n DESC",
            "SELECT country, count(*) FROM betfront GROUP BY country ORDER BY count(*) DESC"
        ));
    }

    #[test]
    fn set_operations_compare_structurally() {
        assert!(matches(
            "SELECT c FROM a UNION SELECT c FROM b",
            "select c from a union select c from b"
        ));
        assert!(!matches(
            "SELECT c FROM a UNION SELECT c FROM b",
            "SELECT c FROM a UNION ALL SELECT c FROM b"
        ));
        assert!(!matches(
            "SELECT c FROM a INTERSECT SELECT c FROM b",
            "SELECT c FROM a EXCEPT SELECT c FROM b"
        ));
    }

    #[test]
    fn not_folds_into_comparisons() {
        assert!(matches(
            "SELECT * FROM t WHERE NOT x = 1",
            "SELECT * FROM t WHERE x != 1"
        ));
        assert!(matches(
            "SELECT * FROM t WHERE NOT x < 5",
            "SELECT * FROM t WHERE x >= 5"
        ));
        assert!(matches(
            "SELECT * FROM t WHERE NOT x IS NULL",
            "SELECT * FROM t WHERE x IS NOT NULL"
        ));
    }

    #[test]
    fn in_list_is_a_set() {
        assert!(matches(
            "SELECT * FROM t WHERE x IN (2, 1, 2)",
            "SELECT * FROM t WHERE x IN (1, 2)"
        ));
    }

    #[test]
    fn canonicalize_is_idempotent_on_samples() {
        for sql in [
            EXAMPLE_GOLD,
            "SELECT DISTINCT country FROM betfront WHERE year IN (2009, 2010) ORDER BY country",
            "SELECT b.match, f.season FROM betfront b JOIN football_data f ON b.country = f.country \
             WHERE b.year > 2010 OR f.bwd IS NULL",
            "SELECT country FROM betfront UNION SELECT country FROM football_data",
            "SELECT count(*) FROM t WHERE a = 'x' AND (b = 1 OR c = 2) GROUP BY d HAVING count(*) > 3",
            "SELECT match FROM betfront WHERE country IN (SELECT country FROM football_data)",
            "SELECT a.x FROM t a, t b WHERE a.x = b.y",
            "SELECT x + 1 * 2 FROM t ORDER BY x - (1 - 2) DESC LIMIT 3 OFFSET 1",
            "SELECT a.x FROM a LEFT JOIN b ON a.x = b.y WHERE a.z = 1",
            "SELECT -x FROM t WHERE NOT (a = 1 OR b = 2)",
            "SELECT a FROM t WHERE x = (SELECT max(y) FROM u WHERE u.k = t.k)",
            "SELECT upper(name) || '-' || lower(name) FROM t",
            "SELECT a FROM t ORDER BY a * 2 + 1 DESC",
            "SELECT DISTINCT a, b FROM t LIMIT 2, 5",
            "SELECT a FROM t WHERE NOT a LIKE 'x%'",
            "SELECT count(*) FROM t1, t2, t3 WHERE t1.a = t2.b AND t2.b = t3.c",
            "SELECT \"home opening\" FROM \"bet front\" WHERE \"home opening\" > 2",
            "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u WHERE u.x = t.a)",
            "SELECT a FROM t WHERE x BETWEEN 1 AND 3 OR y IS NULL",
        ] {
            let first = canon(sql);
            let second = canon(&first.to_sql());
            assert_eq!(first, second, "not idempotent for {sql:?}\nrendered: {}", first.to_sql());
        }
    }

    #[test]
    fn unsupported_constructs_classify_as_errors() {
        assert!(matches!(
            canonicalize_text("SELECT * FROM t LIMIT -1"),
            Err(SqlError::Unsupported { .. })
        ));
        assert!(matches!(
            canonicalize_text("SELECT * FROM (SELECT 1)"),
            Err(SqlError::Unsupported { .. })
        ));
    }

    // ------------------------------------------------------------------
    // Classifier.

    #[test]
    fn classify_correct_iff_exact_match() {
        let gold = canon(EXAMPLE_GOLD);
        assert_eq!(classify_error(&gold, &gold), ErrorClass::Correct);
    }

    #[test]
    fn classify_output_for_extra_count_column() {
        let gold = canon(EXAMPLE_GOLD);
        let pred = canon(
            "SELECT YEAR, count(*) FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1",
        );
        assert_eq!(classify_error(&pred, &gold), ErrorClass::Output);
    }

    #[test]
    fn classify_fuzzy_for_equality_instead_of_like() {
        let gold = canon("SELECT year FROM betfront WHERE match LIKE '%Malta%'");
        let pred = canon("SELECT year FROM betfront WHERE match = 'Malta - Albania'");
        assert_eq!(classify_error(&pred, &gold), ErrorClass::Fuzzy);
    }

    #[test]
    fn classify_fuzzy_for_substring_literal() {
        let gold = canon("SELECT year FROM betfront WHERE match = 'Malta'");
        let pred = canon("SELECT year FROM betfront WHERE match = 'Malta - Albania'");
        assert_eq!(classify_error(&pred, &gold), ErrorClass::Fuzzy);
    }

    #[test]
    fn classify_other_for_combined_defects() {
        let gold = canon("SELECT year FROM betfront WHERE match LIKE '%Malta%'");
        let pred = canon("SELECT year, match FROM betfront WHERE match = 'Malta - Albania'");
        assert_eq!(classify_error(&pred, &gold), ErrorClass::Other);
    }

    #[test]
    fn classify_other_for_different_column_fuzzy() {
        let gold = canon("SELECT year FROM betfront WHERE match LIKE '%Malta%'");
        let pred = canon("SELECT year FROM betfront WHERE country = 'Malta'");
        assert_eq!(classify_error(&pred, &gold), ErrorClass::Other);
    }

    #[test]
    fn classify_output_requires_strict_superset() {
        let gold = canon("SELECT a, b FROM t");
        let shuffled = canon("SELECT b, a FROM t");
        assert_eq!(classify_error(&shuffled, &gold), ErrorClass::Correct);
        let missing = canon("SELECT a FROM t");
        assert_eq!(classify_error(&missing, &gold), ErrorClass::Other);
    }

    // ------------------------------------------------------------------
    // Lint.

    #[test]
    fn lint_flags_improper_null_check() {
        let warnings = lint_gold("SELECT * FROM t WHERE outcome = \"\"", None).unwrap();
        assert!(warnings
            .iter()
            .any(|w| matches!(w, GoldLint::ImproperNullCheck { .. })));
        let warnings = lint_gold("SELECT * FROM t WHERE outcome = ''", None).unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn lint_accepts_distinct_count() {
        let warnings = lint_gold("SELECT count(DISTINCT match) FROM betfront", None).unwrap();
        assert!(warnings.is_empty());
    }

    #[test]
    fn lint_missing_distinct_with_database_evidence() {
        // Oracle: direct scan of the fixture; 'Malta - Albania' appears
        // twice in betfront.match, so counting without DISTINCT over-counts.
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        let values = crate::ingest::column_values(&db, "betfront", "match", None).unwrap();
        let texts: Vec<String> = values.iter().filter_map(|v| v.as_text()).collect();
        let distinct: std::collections::HashSet<&String> = texts.iter().collect();
        assert!(
            distinct.len() < texts.len(),
            "fixture must contain a duplicate match"
        );

        let warnings = lint_gold("SELECT count(match) FROM betfront", Some(&db)).unwrap();
        assert_eq!(
            warnings,
            vec![GoldLint::MissingDistinct {
                column: "match".into(),
                table: Some("betfront".into()),
            }]
        );

        // year-distinct counting over a column without duplicates is clean.
        let warnings = lint_gold("SELECT count(datetime) FROM betfront", Some(&db)).unwrap();
        assert!(warnings.is_empty());
    }

    // ------------------------------------------------------------------
    // Execution oracle.

    #[test]
    fn execution_match_on_equivalent_queries() {
        // Oracle: both forms were run by hand on the fixture; each returns
        // the single row (2013) / the same 12-row match list.
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(execution_match(
            &db,
            "SELECT max(year) FROM betfront",
            "SELECT year FROM betfront ORDER BY year DESC LIMIT 1"
        )
        .unwrap());
        assert!(execution_match(
            &db,
            "SELECT betfront.match FROM betfront WHERE 2010 = year",
            "SELECT match FROM betfront WHERE year = 2010"
        )
        .unwrap());
        assert!(!execution_match(
            &db,
            "SELECT count(match) FROM betfront",
            "SELECT count(DISTINCT match) FROM betfront"
        )
        .unwrap());
    }

    #[test]
    fn execution_match_column_order_insensitive() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(execution_match(
            &db,
            "SELECT year, country FROM betfront",
            "SELECT country, year FROM betfront"
        )
        .unwrap());
    }

    #[test]
    fn execution_match_wide_join_with_swapped_table_order() {
        // 19 result columns: permutation matching must still find the
        // column mapping between the two table orders.
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(execution_match(
            &db,
            "SELECT * FROM betfront JOIN football_data ON betfront.country = football_data.country",
            "SELECT * FROM football_data JOIN betfront ON betfront.country = football_data.country"
        )
        .unwrap());
        assert!(!execution_match(
            &db,
            "SELECT * FROM betfront JOIN football_data ON betfront.country = football_data.country",
            "SELECT * FROM football_data JOIN betfront ON betfront.year = football_data.bwh"
        )
        .unwrap());
    }

    #[test]
    fn execution_match_handles_duplicate_column_signatures() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(execution_match(
            &db,
            "SELECT year, year, country FROM betfront",
            "SELECT country, year, year FROM betfront"
        )
        .unwrap());
        // Equal per-column signatures but no permutation aligns the rows.
        assert!(!execution_match(
            &db,
            "SELECT 1 AS n, 'a' AS t UNION ALL SELECT 2, 'b'",
            "SELECT 1 AS n, 'b' AS t UNION ALL SELECT 2, 'a'"
        )
        .unwrap());
    }

    #[test]
    fn execution_match_permutes_columns_even_when_ordered() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(execution_match(
            &db,
            "SELECT year, country FROM betfront ORDER BY datetime",
            "SELECT country, year FROM betfront ORDER BY datetime"
        )
        .unwrap());
    }

    #[test]
    fn execution_match_row_order_enforced_for_ordered_gold() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        assert!(!execution_match(
            &db,
            "SELECT year FROM betfront ORDER BY year DESC",
            "SELECT year FROM betfront ORDER BY year ASC"
        )
        .unwrap());
        // Same queries compared unordered are equal.
        assert!(execution_match(
            &db,
            "SELECT year FROM betfront ORDER BY year DESC",
            "SELECT year FROM betfront"
        )
        .unwrap());
    }

    #[test]
    fn execution_error_is_tagged_per_side() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        let err = execution_match(&db, "SELEC year", "SELECT year FROM betfront").unwrap_err();
        let ExecError::Execution { side, .. } = err;
        assert_eq!(side, ExecSide::Pred);
        let err = execution_match(
            &db,
            "SELECT year FROM betfront",
            "SELECT nope FROM betfront",
        )
        .unwrap_err();
        let ExecError::Execution { side, .. } = err;
        assert_eq!(side, ExecSide::Gold);
    }

    #[test]
    fn exact_match_implies_execution_match_on_gold_fixtures() {
        let dir = tempfile::tempdir().unwrap();
        let db =
            crate::ingest::open_database(crate::fixtures::example_database(dir.path())).unwrap();
        for spec in crate::fixtures::example_queries() {
            let gold = canon(&spec.gold_sql);
            assert!(exact_match(&gold, &gold));
            assert!(
                execution_match(&db, &spec.gold_sql, &spec.gold_sql).unwrap(),
                "{} not execution-equal to itself",
                spec.id
            );
        }
    }
}
