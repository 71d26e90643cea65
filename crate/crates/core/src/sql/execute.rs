//! Execution oracle: run predicted and gold SQL on the same read-only
//! database and compare result multisets. Column order never matters; row
//! order matters only when the gold query carries an ORDER BY. Uses the
//! engine's own parser, so it also covers predictions outside the
//! canonicalizer's dialect subset.

use thiserror::Error;

use crate::ingest::DatabaseHandle;

use super::parser::parse_statement;

const MAX_RESULT_ROWS: usize = 1_000_000;
/// Bound on column assignments tried when several columns share the same
/// value signature.
const MAX_ASSIGNMENT_TRIES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecSide {
    Pred,
    Gold,
}

impl std::fmt::Display for ExecSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecSide::Pred => f.write_str("predicted"),
            ExecSide::Gold => f.write_str("gold"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("{side} query failed: {message}")]
    Execution { side: ExecSide, message: String },
}

/// Comparable rendering of one result cell. Integer-valued reals equal their
/// integer counterparts; text stays case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Cell {
    Null,
    Number(String),
    Text(String),
    Blob(String),
}

fn cell_from_ref(value: rusqlite::types::ValueRef<'_>) -> Cell {
    use rusqlite::types::ValueRef;
    match value {
        ValueRef::Null => Cell::Null,
        ValueRef::Integer(i) => Cell::Number(i.to_string()),
        ValueRef::Real(r) => {
            if r.fract() == 0.0 && r.abs() < 9.0e15 {
                Cell::Number(format!("{}", r as i64))
            } else {
                Cell::Number(format!("{r}"))
            }
        }
        ValueRef::Text(t) => Cell::Text(String::from_utf8_lossy(t).into_owned()),
        ValueRef::Blob(b) => Cell::Blob(hex::encode(b)),
    }
}

fn run_query(db: &DatabaseHandle, sql: &str, side: ExecSide) -> Result<Vec<Vec<Cell>>, ExecError> {
    let wrap = |message: String| ExecError::Execution { side, message };
    let mut stmt = db
        .connection()
        .prepare(sql)
        .map_err(|e| wrap(e.to_string()))?;
    let ncols = stmt.column_count();
    let mut rows = stmt.query([]).map_err(|e| wrap(e.to_string()))?;
    let mut result = Vec::new();
    while let Some(row) = rows.next().map_err(|e| wrap(e.to_string()))? {
        let mut cells = Vec::with_capacity(ncols);
        for i in 0..ncols {
            cells.push(cell_from_ref(
                row.get_ref(i).map_err(|e| wrap(e.to_string()))?,
            ));
        }
        result.push(cells);
        if result.len() > MAX_RESULT_ROWS {
            return Err(wrap(format!("result exceeded {MAX_RESULT_ROWS} rows")));
        }
    }
    Ok(result)
}

/// Whether the gold statement orders its output. Falls back to a textual
/// scan when the gold text is outside the canonicalizer's dialect.
fn gold_is_ordered(gold_sql: &str) -> bool {
    match parse_statement(gold_sql) {
        Ok(stmt) => !stmt.query.order_by.is_empty(),
        Err(_) => {
            let folded: String = gold_sql.split_whitespace().collect::<Vec<_>>().join(" ");
            folded.to_lowercase().contains("order by")
        }
    }
}

fn project(rows: &[Vec<Cell>], perm: &[usize]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|row| perm.iter().map(|&i| row[i].clone()).collect())
        .collect()
}

/// Per-column value signature. Only columns with equal signatures can map
/// to each other, which prunes the permutation search to the few candidates
/// that could possibly match.
fn column_signature(rows: &[Vec<Cell>], col: usize, ordered: bool) -> Vec<Cell> {
    let mut values: Vec<Cell> = rows.iter().map(|row| row[col].clone()).collect();
    if !ordered {
        values.sort();
    }
    values
}

/// Backtracks over signature-compatible column assignments (gold column ->
/// pred column), verifying the full row comparison for each complete
/// assignment. Gives up (conservatively unequal) after
/// `MAX_ASSIGNMENT_TRIES` complete assignments.
fn match_under_permutation(
    pred_rows: &[Vec<Cell>],
    gold_rows: &[Vec<Cell>],
    ordered: bool,
) -> bool {
    let ncols = gold_rows[0].len();
    let pred_sigs: Vec<Vec<Cell>> = (0..ncols)
        .map(|c| column_signature(pred_rows, c, ordered))
        .collect();
    let candidates: Vec<Vec<usize>> = (0..ncols)
        .map(|gold_col| {
            let gold_sig = column_signature(gold_rows, gold_col, ordered);
            (0..ncols).filter(|&p| pred_sigs[p] == gold_sig).collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return false;
    }

    let mut gold_sorted = gold_rows.to_vec();
    if !ordered {
        gold_sorted.sort();
    }
    let mut perm: Vec<usize> = Vec::with_capacity(ncols);
    let mut used = vec![false; ncols];
    let mut tries = 0usize;
    backtrack(
        &candidates,
        pred_rows,
        gold_rows,
        &gold_sorted,
        ordered,
        &mut perm,
        &mut used,
        &mut tries,
    )
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    candidates: &[Vec<usize>],
    pred_rows: &[Vec<Cell>],
    gold_rows: &[Vec<Cell>],
    gold_sorted: &[Vec<Cell>],
    ordered: bool,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    tries: &mut usize,
) -> bool {
    if perm.len() == candidates.len() {
        *tries += 1;
        if *tries > MAX_ASSIGNMENT_TRIES {
            return false;
        }
        let projected = project(pred_rows, perm);
        return if ordered {
            projected == gold_rows
        } else {
            let mut sorted = projected;
            sorted.sort();
            sorted == gold_sorted
        };
    }
    for &candidate in &candidates[perm.len()] {
        if used[candidate] {
            continue;
        }
        used[candidate] = true;
        perm.push(candidate);
        if backtrack(
            candidates,
            pred_rows,
            gold_rows,
            gold_sorted,
            ordered,
            perm,
            used,
            tries,
        ) {
            return true;
        }
        perm.pop();
        used[candidate] = false;
        if *tries > MAX_ASSIGNMENT_TRIES {
            return false;
        }
    }
    false
}

/// True iff both statements produce the same result multiset under some
/// column permutation; row order is enforced only when the gold statement
/// orders its output.
pub fn execution_match(
    db: &DatabaseHandle,
    pred_sql: &str,
    gold_sql: &str,
) -> Result<bool, ExecError> {
    let pred_rows = run_query(db, pred_sql, ExecSide::Pred)?;
    let gold_rows = run_query(db, gold_sql, ExecSide::Gold)?;

    if pred_rows.len() != gold_rows.len() {
        return Ok(false);
    }
    let ncols = gold_rows.first().map(Vec::len).unwrap_or(0);
    if pred_rows.first().map(Vec::len).unwrap_or(0) != ncols {
        return Ok(false);
    }
    if pred_rows.is_empty() {
        return Ok(true);
    }

    let ordered = gold_is_ordered(gold_sql);
    Ok(match_under_permutation(&pred_rows, &gold_rows, ordered))
}
