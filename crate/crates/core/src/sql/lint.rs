//! Gold-answer linting: the two repairable defect families real benchmark
//! answers exhibit, COUNT over a duplicable column without DISTINCT and
//! equality checks against the empty string where IS NULL was meant.
//! Warnings are advisory; fixes are applied by a human, never automatically.

use crate::ingest::DatabaseHandle;

use super::ast::*;
use super::parser::parse_statement;
use super::SqlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldLint {
    MissingDistinct {
        column: String,
        table: Option<String>,
    },
    ImproperNullCheck {
        expression: String,
    },
}

impl std::fmt::Display for GoldLint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GoldLint::MissingDistinct { column, table } => match table {
                Some(table) => write!(
                    f,
                    "count({column}) without DISTINCT, but {table}.{column} contains duplicates"
                ),
                None => write!(
                    f,
                    "count({column}) without DISTINCT may double-count duplicates"
                ),
            },
            GoldLint::ImproperNullCheck { expression } => write!(
                f,
                "equality against empty string in {expression:?}; use IS NULL for missing values"
            ),
        }
    }
}

/// Lints a parseable gold statement. With a database handle, a missing
/// DISTINCT is reported only when the counted column actually contains
/// duplicate values; without one, every non-DISTINCT count of a plain
/// column is flagged as potentially duplicated.
pub fn lint_gold(gold_sql: &str, db: Option<&DatabaseHandle>) -> Result<Vec<GoldLint>, SqlError> {
    let stmt = parse_statement(gold_sql)?;
    let mut warnings = Vec::new();
    lint_query(&stmt.query, db, &mut warnings);
    Ok(warnings)
}

fn lint_query(query: &Query, db: Option<&DatabaseHandle>, out: &mut Vec<GoldLint>) {
    let mut cores = vec![&query.first];
    cores.extend(query.set_tail.iter().map(|(_, core)| core));
    for core in cores {
        lint_core(core, db, out);
    }
    for item in &query.order_by {
        lint_expr(&item.expr, db, out);
    }
}

fn lint_core(core: &SelectCore, db: Option<&DatabaseHandle>, out: &mut Vec<GoldLint>) {
    // Column table resolution without a schema: single-table FROM wins,
    // qualified references resolve through aliases.
    let single_table = core.from.as_ref().and_then(|from| {
        if from.joins.is_empty() {
            Some(from.first.name.clone())
        } else {
            None
        }
    });
    let alias_of = |qualifier: &str| -> Option<String> {
        let from = core.from.as_ref()?;
        let mut refs = vec![&from.first];
        refs.extend(from.joins.iter().map(|j| &j.table));
        for r in refs {
            if r.alias
                .as_deref()
                .is_some_and(|a| a.eq_ignore_ascii_case(qualifier))
                || r.name.eq_ignore_ascii_case(qualifier)
            {
                return Some(r.name.clone());
            }
        }
        None
    };

    for item in &core.items {
        if let SelectItem::Expr { expr, .. } = item {
            lint_count_expr(expr, &single_table, &alias_of, db, out);
        }
    }
    if let Some(where_clause) = &core.where_clause {
        lint_expr(where_clause, db, out);
    }
    if let Some(having) = &core.having {
        lint_expr(having, db, out);
        lint_count_expr(having, &single_table, &alias_of, db, out);
    }
}

fn column_has_duplicates(db: &DatabaseHandle, table: &str, column: &str) -> Option<bool> {
    let quote = |n: &str| format!("\"{}\"", n.replace('"', "\"\""));
    let sql = format!(
        "SELECT count({c}) - count(DISTINCT {c}) FROM {t}",
        c = quote(column),
        t = quote(table)
    );
    let extra: i64 = db.connection().query_row(&sql, [], |row| row.get(0)).ok()?;
    Some(extra > 0)
}

fn lint_count_expr(
    expr: &Expr,
    single_table: &Option<String>,
    alias_of: &dyn Fn(&str) -> Option<String>,
    db: Option<&DatabaseHandle>,
    out: &mut Vec<GoldLint>,
) {
    walk(expr, &mut |e| {
        let Expr::Function {
            name,
            distinct: false,
            star: false,
            args,
        } = e
        else {
            return;
        };
        if !name.eq_ignore_ascii_case("count") || args.len() != 1 {
            return;
        }
        let Expr::Column {
            table,
            name: column,
        } = &args[0]
        else {
            return;
        };
        let resolved = match table {
            Some(qualifier) => alias_of(qualifier),
            None => single_table.clone(),
        };
        match (db, &resolved) {
            (Some(db), Some(table)) => {
                if column_has_duplicates(db, table, column) == Some(true) {
                    out.push(GoldLint::MissingDistinct {
                        column: column.clone(),
                        table: Some(table.clone()),
                    });
                }
            }
            _ => out.push(GoldLint::MissingDistinct {
                column: column.clone(),
                table: resolved,
            }),
        }
    });
}

fn lint_expr(expr: &Expr, db: Option<&DatabaseHandle>, out: &mut Vec<GoldLint>) {
    walk(expr, &mut |e| match e {
        Expr::Binary { left, op, right } if matches!(op, BinOp::Eq | BinOp::Neq) => {
            let empty_str = |x: &Expr| matches!(x, Expr::Str(s) if s.is_empty());
            if empty_str(left) || empty_str(right) {
                let symbol = if *op == BinOp::Eq { "=" } else { "!=" };
                let side = if empty_str(right) { left } else { right };
                out.push(GoldLint::ImproperNullCheck {
                    expression: format!("{} {symbol} ''", describe(side)),
                });
            }
        }
        Expr::InSubquery { query, .. } | Expr::Exists { query, .. } | Expr::Subquery(query) => {
            lint_query(query, db, out);
        }
        _ => {}
    });
}

fn describe(expr: &Expr) -> String {
    match expr {
        Expr::Column { table, name } => match table {
            Some(t) => format!("{t}.{name}"),
            None => name.clone(),
        },
        other => format!("{other:?}"),
    }
}

/// Pre-order walk over an expression tree, without descending into
/// subqueries (those are linted as queries).
fn walk(expr: &Expr, visit: &mut dyn FnMut(&Expr)) {
    visit(expr);
    match expr {
        Expr::Neg(e) | Expr::Not(e) => walk(e, visit),
        Expr::Binary { left, right, .. } => {
            walk(left, visit);
            walk(right, visit);
        }
        Expr::Function { args, .. } => {
            for arg in args {
                walk(arg, visit);
            }
        }
        Expr::IsNull { expr, .. } => walk(expr, visit),
        Expr::Like { expr, pattern, .. } => {
            walk(expr, visit);
            walk(pattern, visit);
        }
        Expr::InList { expr, items, .. } => {
            walk(expr, visit);
            for item in items {
                walk(item, visit);
            }
        }
        Expr::InSubquery { expr, .. } => walk(expr, visit),
        Expr::Between {
            expr, low, high, ..
        } => {
            walk(expr, visit);
            walk(low, visit);
            walk(high, visit);
        }
        Expr::Column { .. }
        | Expr::Number(_)
        | Expr::Str(_)
        | Expr::Null
        | Expr::Exists { .. }
        | Expr::Subquery(_) => {}
    }
}
