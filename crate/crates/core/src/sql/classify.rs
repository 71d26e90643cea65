//! Error taxonomy for evaluated predictions: Correct, Output (extra SELECT
//! columns only), Fuzzy (exact string equality where the gold uses pattern
//! matching, on the same column), or Other (anything else, including pairs
//! with both defects).

use serde::{Deserialize, Serialize};

use super::canonical::{CanonicalPred, CanonicalQuery, PredShape};
use super::exact_match;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Correct,
    Output,
    Fuzzy,
    Other,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 4] = [
        ErrorClass::Correct,
        ErrorClass::Output,
        ErrorClass::Fuzzy,
        ErrorClass::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorClass::Correct => "correct",
            ErrorClass::Output => "output",
            ErrorClass::Fuzzy => "fuzzy",
            ErrorClass::Other => "other",
        }
    }
}

impl std::fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Total and deterministic: every canonicalized pair maps to exactly one
/// class, and Correct holds iff `exact_match` does.
pub fn classify_error(pred: &CanonicalQuery, gold: &CanonicalQuery) -> ErrorClass {
    if exact_match(pred, gold) {
        ErrorClass::Correct
    } else if output_defect_only(pred, gold) {
        ErrorClass::Output
    } else if fuzzy_defect_only(pred, gold) {
        ErrorClass::Fuzzy
    } else {
        ErrorClass::Other
    }
}

fn multiset(items: &[String]) -> Vec<&String> {
    let mut sorted: Vec<&String> = items.iter().collect();
    sorted.sort();
    sorted
}

/// Gold's select list is a strict sub-multiset of the prediction's and every
/// other component matches.
fn output_defect_only(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    if !components_equal_except_select(pred, gold) {
        return false;
    }
    let pred_items = multiset(&pred.select_items);
    let gold_items = multiset(&gold.select_items);
    if pred_items.len() <= gold_items.len() {
        return false;
    }
    // Every gold item must be consumable from the prediction's multiset.
    let mut remaining = pred_items;
    for item in gold_items {
        match remaining.iter().position(|p| *p == item) {
            Some(at) => {
                remaining.remove(at);
            }
            None => return false,
        }
    }
    true
}

fn components_equal_except_select(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    pred.distinct == gold.distinct
        && pred.from_tables == gold.from_tables
        && pred.left_joins == gold.left_joins
        && pred.where_conds == gold.where_conds
        && pred.group_by == gold.group_by
        && pred.having == gold.having
        && pred.order_by == gold.order_by
        && pred.limit == gold.limit
        && pred.offset == gold.offset
        && pred.set_tail == gold.set_tail
}

fn components_equal_except_where(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    multiset(&pred.select_items) == multiset(&gold.select_items)
        && pred.distinct == gold.distinct
        && pred.from_tables == gold.from_tables
        && pred.left_joins == gold.left_joins
        && pred.group_by == gold.group_by
        && pred.having == gold.having
        && pred.order_by == gold.order_by
        && pred.limit == gold.limit
        && pred.offset == gold.offset
        && pred.set_tail == gold.set_tail
}

fn strip_wildcards(pattern: &str) -> String {
    pattern.chars().filter(|c| *c != '%' && *c != '_').collect()
}

/// One differing-predicate pair counts as fuzzy when the prediction tests
/// string equality on the column the gold matches with LIKE, or when the
/// gold's literal (wildcards removed) is a proper substring of the
/// prediction's literal on the same column.
fn fuzzy_pair(pred: &CanonicalPred, gold: &CanonicalPred) -> bool {
    let PredShape::ColEqStr {
        column: pred_col,
        literal: pred_lit,
    } = &pred.shape
    else {
        return false;
    };
    match &gold.shape {
        PredShape::ColLikeStr { column, .. } => column == pred_col,
        PredShape::ColEqStr { column, literal } => {
            let core = strip_wildcards(literal);
            column == pred_col
                && literal != pred_lit
                && !core.is_empty()
                && pred_lit.contains(&core)
        }
        PredShape::Other => false,
    }
}

/// The queries agree everywhere except WHERE, and every differing predicate
/// pairs up as an exact-for-fuzzy substitution.
fn fuzzy_defect_only(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    if !components_equal_except_where(pred, gold) {
        return false;
    }
    let pred_only: Vec<&CanonicalPred> = pred
        .where_conds
        .iter()
        .filter(|p| !gold.where_conds.iter().any(|g| g.text == p.text))
        .collect();
    let gold_only: Vec<&CanonicalPred> = gold
        .where_conds
        .iter()
        .filter(|g| !pred.where_conds.iter().any(|p| p.text == g.text))
        .collect();
    if gold_only.is_empty() || pred_only.len() != gold_only.len() {
        return false;
    }
    let mut used = vec![false; pred_only.len()];
    for gold_pred in &gold_only {
        let matched = pred_only
            .iter()
            .enumerate()
            .find(|(i, p)| !used[*i] && fuzzy_pair(p, gold_pred));
        match matched {
            Some((i, _)) => used[i] = true,
            None => return false,
        }
    }
    true
}
