//! Canonical form for parsed queries: case-folded identifiers, inlined table
//! aliases, commutative predicates ordered lexicographically, normalized
//! numeric literals, AND-sets for WHERE/HAVING, and multiset SELECT lists.
//! Two queries that differ only in non-semantic syntax canonicalize to equal
//! values; string literals stay case-sensitive throughout.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::SqlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderDirection {
    Asc,
    Desc,
}

/// Structured view of a canonical predicate, kept alongside its rendering so
/// the error classifier can recognize equality-vs-LIKE substitutions without
/// re-parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredShape {
    ColEqStr { column: String, literal: String },
    ColLikeStr { column: String, pattern: String },
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalPred {
    pub text: String,
    pub shape: PredShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalQuery {
    pub distinct: bool,
    /// Rendered select expressions in source order; compared as a multiset.
    pub select_items: Vec<String>,
    pub from_tables: BTreeSet<String>,
    /// LEFT JOINs in join order: (table instance, rendered ON condition).
    pub left_joins: Vec<(String, String)>,
    /// Conjuncts of WHERE plus inner-join ON conditions, sorted and deduped.
    pub where_conds: Vec<CanonicalPred>,
    pub group_by: BTreeSet<String>,
    pub having: BTreeSet<String>,
    pub order_by: Vec<(String, OrderDirection)>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
    /// Set-operation tail in source order (left-associative chain).
    pub set_tail: Vec<(SetOperator, CanonicalQuery)>,
}

pub fn canonicalize(stmt: &Statement) -> Result<CanonicalQuery, SqlError> {
    canonical_query(&stmt.query, None)
}

/// True iff every component matches under its comparison semantics:
/// select items as an unordered multiset, ORDER BY ordered, everything
/// else set- or value-equal. Literals compare case-sensitively.
pub fn exact_match(pred: &CanonicalQuery, gold: &CanonicalQuery) -> bool {
    let mut pred_items = pred.select_items.clone();
    let mut gold_items = gold.select_items.clone();
    pred_items.sort();
    gold_items.sort();
    pred_items == gold_items
        && pred.distinct == gold.distinct
        && pred.from_tables == gold.from_tables
        && pred.left_joins == gold.left_joins
        && pred.where_conds == gold.where_conds
        && pred.group_by == gold.group_by
        && pred.having == gold.having
        && pred.order_by == gold.order_by
        && pred.limit == gold.limit
        && pred.offset == gold.offset
        && pred.set_tail.len() == gold.set_tail.len()
        && pred
            .set_tail
            .iter()
            .zip(&gold.set_tail)
            .all(|((po, pq), (go, gq))| po == go && exact_match(pq, gq))
}

impl CanonicalQuery {
    /// Renders back to SQL. Reparsing and recanonicalizing the result yields
    /// the same value (idempotence).
    pub fn to_sql(&self) -> String {
        let mut sql = String::from("select ");
        if self.distinct {
            sql.push_str("distinct ");
        }
        sql.push_str(&self.select_items.join(", "));
        if !self.from_tables.is_empty() || !self.left_joins.is_empty() {
            sql.push_str(" from ");
            let tables: Vec<String> = self.from_tables.iter().map(|t| render_ident(t)).collect();
            sql.push_str(&tables.join(", "));
            for (table, on) in &self.left_joins {
                sql.push_str(&format!(" left join {} on {}", render_ident(table), on));
            }
        }
        if !self.where_conds.is_empty() {
            sql.push_str(" where ");
            let conds: Vec<&str> = self.where_conds.iter().map(|c| c.text.as_str()).collect();
            sql.push_str(&conds.join(" and "));
        }
        if !self.group_by.is_empty() {
            sql.push_str(" group by ");
            sql.push_str(&self.group_by.iter().cloned().collect::<Vec<_>>().join(", "));
        }
        if !self.having.is_empty() {
            sql.push_str(" having ");
            sql.push_str(
                &self
                    .having
                    .iter()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(" and "),
            );
        }
        if !self.order_by.is_empty() {
            sql.push_str(" order by ");
            let items: Vec<String> = self
                .order_by
                .iter()
                .map(|(expr, dir)| match dir {
                    OrderDirection::Asc => expr.clone(),
                    OrderDirection::Desc => format!("{expr} desc"),
                })
                .collect();
            sql.push_str(&items.join(", "));
        }
        if let Some(limit) = self.limit {
            sql.push_str(&format!(" limit {limit}"));
            if let Some(offset) = self.offset {
                sql.push_str(&format!(" offset {offset}"));
            }
        }
        for (op, tail) in &self.set_tail {
            sql.push_str(&format!(" {} {}", op.keyword(), tail.to_sql()));
        }
        sql
    }
}

// ---------------------------------------------------------------------------
// Scope: table instances and alias resolution.

struct Scope<'a> {
    /// alias or table name (lowercase) -> canonical instance name.
    names: HashMap<String, String>,
    /// Set when the FROM clause holds exactly one table instance; bare
    /// columns are qualified with it.
    single: Option<String>,
    parent: Option<&'a Scope<'a>>,
}

impl<'a> Scope<'a> {
    fn empty(parent: Option<&'a Scope<'a>>) -> Self {
        Scope {
            names: HashMap::new(),
            single: None,
            parent,
        }
    }

    fn resolve(&self, qualifier: &str) -> Option<String> {
        let key = qualifier.to_lowercase();
        match self.names.get(&key) {
            Some(instance) => Some(instance.clone()),
            None => self.parent.and_then(|p| p.resolve(qualifier)),
        }
    }
}

/// Builds the scope for a FROM clause. A table occurring more than once
/// (self-join) gets positional instance names `table#1`, `table#2`, ... so
/// alias spellings do not leak into the canonical form.
fn build_scope<'a>(
    from: Option<&FromClause>,
    parent: Option<&'a Scope<'a>>,
) -> (Scope<'a>, Vec<String>) {
    let mut scope = Scope::empty(parent);
    let Some(from) = from else {
        return (scope, Vec::new());
    };
    let mut refs: Vec<&TableRef> = vec![&from.first];
    refs.extend(from.joins.iter().map(|j| &j.table));

    let mut total: HashMap<String, usize> = HashMap::new();
    for r in &refs {
        *total.entry(r.name.to_lowercase()).or_insert(0) += 1;
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut instances = Vec::with_capacity(refs.len());
    for r in &refs {
        let table = r.name.to_lowercase();
        let k = seen.entry(table.clone()).or_insert(0);
        *k += 1;
        let instance = if total[&table] > 1 {
            format!("{table}#{k}")
        } else {
            table.clone()
        };
        if let Some(alias) = &r.alias {
            scope.names.insert(alias.to_lowercase(), instance.clone());
        }
        scope.names.entry(table).or_insert_with(|| instance.clone());
        instances.push(instance);
    }
    if instances.len() == 1 {
        scope.single = Some(instances[0].clone());
    }
    (scope, instances)
}

// ---------------------------------------------------------------------------
// Expression normalization.

fn canonical_number(raw: &str) -> Result<String, SqlError> {
    let value: f64 = raw.parse().map_err(|_| SqlError::Unsupported {
        construct: format!("numeric literal {raw:?}"),
    })?;
    if !value.is_finite() {
        return Err(SqlError::Unsupported {
            construct: format!("numeric literal {raw:?} out of range"),
        });
    }
    if value.fract() == 0.0 && value.abs() < 9.0e15 {
        Ok(format!("{}", value as i64))
    } else {
        Ok(format!("{value}"))
    }
}

fn normalize(expr: &Expr, scope: &Scope) -> Result<Expr, SqlError> {
    Ok(match expr {
        Expr::Column { table, name } => {
            let name = name.to_lowercase();
            let table = match table {
                Some(q) => Some(scope.resolve(q).unwrap_or_else(|| q.to_lowercase())),
                None => scope.single.clone(),
            };
            Expr::Column { table, name }
        }
        Expr::Number(raw) => Expr::Number(canonical_number(raw)?),
        Expr::Str(s) => Expr::Str(s.clone()),
        Expr::Null => Expr::Null,
        Expr::Neg(inner) => match normalize(inner, scope)? {
            Expr::Number(n) => {
                let flipped = if let Some(rest) = n.strip_prefix('-') {
                    rest.to_string()
                } else {
                    format!("-{n}")
                };
                Expr::Number(flipped)
            }
            other => Expr::Neg(Box::new(other)),
        },
        Expr::Not(inner) => normalize_not(inner, scope)?,
        Expr::Binary { left, op, right } => {
            let left = normalize(left, scope)?;
            let right = normalize(right, scope)?;
            normalize_binary(left, *op, right, scope)?
        }
        Expr::Function {
            name,
            distinct,
            star,
            args,
        } => Expr::Function {
            name: name.to_lowercase(),
            distinct: *distinct,
            star: *star,
            args: args
                .iter()
                .map(|a| normalize(a, scope))
                .collect::<Result<_, _>>()?,
        },
        Expr::IsNull { expr, negated } => Expr::IsNull {
            expr: Box::new(normalize(expr, scope)?),
            negated: *negated,
        },
        Expr::Like {
            expr,
            pattern,
            negated,
        } => Expr::Like {
            expr: Box::new(normalize(expr, scope)?),
            pattern: Box::new(normalize(pattern, scope)?),
            negated: *negated,
        },
        Expr::InList {
            expr,
            items,
            negated,
        } => {
            let expr = normalize(expr, scope)?;
            let mut rendered: Vec<(String, Expr)> = items
                .iter()
                .map(|i| {
                    let n = normalize(i, scope)?;
                    Ok((render(&n, scope)?, n))
                })
                .collect::<Result<_, SqlError>>()?;
            rendered.sort_by(|a, b| a.0.cmp(&b.0));
            rendered.dedup_by(|a, b| a.0 == b.0);
            Expr::InList {
                expr: Box::new(expr),
                items: rendered.into_iter().map(|(_, e)| e).collect(),
                negated: *negated,
            }
        }
        Expr::InSubquery {
            expr,
            query,
            negated,
        } => Expr::InSubquery {
            expr: Box::new(normalize(expr, scope)?),
            query: query.clone(),
            negated: *negated,
        },
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => Expr::Between {
            expr: Box::new(normalize(expr, scope)?),
            low: Box::new(normalize(low, scope)?),
            high: Box::new(normalize(high, scope)?),
            negated: *negated,
        },
        Expr::Exists { query, negated } => Expr::Exists {
            query: query.clone(),
            negated: *negated,
        },
        Expr::Subquery(query) => Expr::Subquery(query.clone()),
    })
}

/// NOT folds into the negated node where three-valued logic permits:
/// comparisons invert, LIKE/IN/BETWEEN/IS NULL/EXISTS toggle their flag.
fn normalize_not(inner: &Expr, scope: &Scope) -> Result<Expr, SqlError> {
    let inner = normalize(inner, scope)?;
    Ok(match inner {
        Expr::Not(e) => *e,
        Expr::IsNull { expr, negated } => Expr::IsNull {
            expr,
            negated: !negated,
        },
        Expr::Like {
            expr,
            pattern,
            negated,
        } => Expr::Like {
            expr,
            pattern,
            negated: !negated,
        },
        Expr::InList {
            expr,
            items,
            negated,
        } => Expr::InList {
            expr,
            items,
            negated: !negated,
        },
        Expr::InSubquery {
            expr,
            query,
            negated,
        } => Expr::InSubquery {
            expr,
            query,
            negated: !negated,
        },
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => Expr::Between {
            expr,
            low,
            high,
            negated: !negated,
        },
        Expr::Exists { query, negated } => Expr::Exists {
            query,
            negated: !negated,
        },
        Expr::Binary { left, op, right } => {
            let inverse = match op {
                BinOp::Eq => Some(BinOp::Neq),
                BinOp::Neq => Some(BinOp::Eq),
                BinOp::Lt => Some(BinOp::Ge),
                BinOp::Le => Some(BinOp::Gt),
                BinOp::Gt => Some(BinOp::Le),
                BinOp::Ge => Some(BinOp::Lt),
                _ => None,
            };
            match inverse {
                Some(op) => normalize_binary(*left, op, *right, scope)?,
                None => Expr::Not(Box::new(Expr::Binary { left, op, right })),
            }
        }
        other => Expr::Not(Box::new(other)),
    })
}

/// Directional comparisons flip to `<`/`<=`; the commutative `=`/`!=` order
/// their operands lexicographically by rendering.
fn normalize_binary(left: Expr, op: BinOp, right: Expr, scope: &Scope) -> Result<Expr, SqlError> {
    let (left, op, right) = match op {
        BinOp::Gt => (right, BinOp::Lt, left),
        BinOp::Ge => (right, BinOp::Le, left),
        _ => (left, op, right),
    };
    if matches!(op, BinOp::Eq | BinOp::Neq) && render(&left, scope)? > render(&right, scope)? {
        return Ok(Expr::Binary {
            left: Box::new(right),
            op,
            right: Box::new(left),
        });
    }
    Ok(Expr::Binary {
        left: Box::new(left),
        op,
        right: Box::new(right),
    })
}

// ---------------------------------------------------------------------------
// Rendering.

const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_CMP: u8 = 4;
const PREC_ADD: u8 = 5;
const PREC_MUL: u8 = 6;
const PREC_NEG: u8 = 7;
const PREC_ATOM: u8 = 10;

fn prec(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary { op, .. } => match op {
            BinOp::Or => PREC_ATOM, // always rendered parenthesized
            BinOp::And => PREC_ATOM,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => PREC_CMP,
            BinOp::Add | BinOp::Sub | BinOp::Concat => PREC_ADD,
            BinOp::Mul | BinOp::Div | BinOp::Mod => PREC_MUL,
        },
        Expr::Not(_) => PREC_NOT,
        Expr::Neg(_) => PREC_NEG,
        Expr::IsNull { .. }
        | Expr::Like { .. }
        | Expr::InList { .. }
        | Expr::InSubquery { .. }
        | Expr::Between { .. } => PREC_CMP,
        _ => PREC_ATOM,
    }
}

fn is_bare_safe(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !super::parser::is_reserved(name)
}

fn render_ident(name: &str) -> String {
    if is_bare_safe(name) {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

fn render_str(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn render_with(expr: &Expr, min_prec: u8, scope: &Scope) -> Result<String, SqlError> {
    let text = render(expr, scope)?;
    if prec(expr) < min_prec {
        Ok(format!("({text})"))
    } else {
        Ok(text)
    }
}

/// Collects the operands of a maximal same-operator chain (AND/OR are
/// associative and commutative, including under three-valued logic).
fn flatten_logic<'e>(expr: &'e Expr, which: BinOp, out: &mut Vec<&'e Expr>) {
    match expr {
        Expr::Binary { left, op, right } if *op == which => {
            flatten_logic(left, which, out);
            flatten_logic(right, which, out);
        }
        other => out.push(other),
    }
}

fn render(expr: &Expr, scope: &Scope) -> Result<String, SqlError> {
    Ok(match expr {
        Expr::Column { table, name } => match table {
            Some(t) => format!("{}.{}", render_ident(t), render_ident(name)),
            None => render_ident(name),
        },
        Expr::Number(n) => n.clone(),
        Expr::Str(s) => render_str(s),
        Expr::Null => "null".to_string(),
        Expr::Neg(inner) => format!("-{}", render_with(inner, PREC_NEG + 1, scope)?),
        Expr::Not(inner) => format!("not {}", render_with(inner, PREC_NOT, scope)?),
        Expr::Binary { op, .. } if matches!(op, BinOp::And | BinOp::Or) => {
            let mut operands = Vec::new();
            flatten_logic(expr, *op, &mut operands);
            let mut rendered: Vec<String> = operands
                .iter()
                .map(|o| render_with(o, PREC_AND, scope))
                .collect::<Result<_, _>>()?;
            rendered.sort();
            rendered.dedup();
            if rendered.len() == 1 {
                rendered.pop().expect("one operand")
            } else {
                let joiner = if *op == BinOp::And { " and " } else { " or " };
                format!("({})", rendered.join(joiner))
            }
        }
        Expr::Binary { left, op, right } => {
            let (own, symbol) = match op {
                BinOp::Eq => (PREC_CMP, "="),
                BinOp::Neq => (PREC_CMP, "!="),
                BinOp::Lt => (PREC_CMP, "<"),
                BinOp::Le => (PREC_CMP, "<="),
                BinOp::Gt => (PREC_CMP, ">"),
                BinOp::Ge => (PREC_CMP, ">="),
                BinOp::Add => (PREC_ADD, "+"),
                BinOp::Sub => (PREC_ADD, "-"),
                BinOp::Concat => (PREC_ADD, "||"),
                BinOp::Mul => (PREC_MUL, "*"),
                BinOp::Div => (PREC_MUL, "/"),
                BinOp::Mod => (PREC_MUL, "%"),
                BinOp::And | BinOp::Or => unreachable!("handled above"),
            };
            format!(
                "{} {symbol} {}",
                render_with(left, own, scope)?,
                render_with(right, own + 1, scope)?
            )
        }
        Expr::Function {
            name,
            distinct,
            star,
            args,
        } => {
            if *star {
                format!("{}(*)", render_ident(name))
            } else {
                let rendered: Vec<String> = args
                    .iter()
                    .map(|a| render(a, scope))
                    .collect::<Result<_, _>>()?;
                let prefix = if *distinct { "distinct " } else { "" };
                format!("{}({prefix}{})", render_ident(name), rendered.join(", "))
            }
        }
        Expr::IsNull { expr, negated } => {
            let suffix = if *negated { "is not null" } else { "is null" };
            format!("{} {suffix}", render_with(expr, PREC_ADD, scope)?)
        }
        Expr::Like {
            expr,
            pattern,
            negated,
        } => {
            let keyword = if *negated { "not like" } else { "like" };
            format!(
                "{} {keyword} {}",
                render_with(expr, PREC_ADD, scope)?,
                render_with(pattern, PREC_ADD, scope)?
            )
        }
        Expr::InList {
            expr,
            items,
            negated,
        } => {
            let keyword = if *negated { "not in" } else { "in" };
            let rendered: Vec<String> = items
                .iter()
                .map(|i| render(i, scope))
                .collect::<Result<_, _>>()?;
            format!(
                "{} {keyword} ({})",
                render_with(expr, PREC_ADD, scope)?,
                rendered.join(", ")
            )
        }
        Expr::InSubquery {
            expr,
            query,
            negated,
        } => {
            let keyword = if *negated { "not in" } else { "in" };
            let sub = canonical_query(query, Some(scope))?;
            format!(
                "{} {keyword} ({})",
                render_with(expr, PREC_ADD, scope)?,
                sub.to_sql()
            )
        }
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => {
            let keyword = if *negated { "not between" } else { "between" };
            format!(
                "{} {keyword} {} and {}",
                render_with(expr, PREC_ADD, scope)?,
                render_with(low, PREC_ADD, scope)?,
                render_with(high, PREC_ADD, scope)?
            )
        }
        Expr::Exists { query, negated } => {
            let prefix = if *negated { "not exists" } else { "exists" };
            let sub = canonical_query(query, Some(scope))?;
            format!("{prefix} ({})", sub.to_sql())
        }
        Expr::Subquery(query) => {
            let sub = canonical_query(query, Some(scope))?;
            format!("({})", sub.to_sql())
        }
    })
}

// ---------------------------------------------------------------------------
// Query-level canonicalization.

fn flatten_and<'e>(expr: &'e Expr, out: &mut Vec<&'e Expr>) {
    match expr {
        Expr::Binary {
            left,
            op: BinOp::And,
            right,
        } => {
            flatten_and(left, out);
            flatten_and(right, out);
        }
        other => out.push(other),
    }
}

/// Renders one top-level conjunct. OR chains keep their surrounding parens
/// so the result reparses as a single predicate.
fn render_pred(expr: &Expr, scope: &Scope) -> Result<String, SqlError> {
    render_with(expr, PREC_AND, scope)
}

fn pred_shape(expr: &Expr, scope: &Scope) -> Result<PredShape, SqlError> {
    Ok(match expr {
        Expr::Binary {
            left,
            op: BinOp::Eq,
            right,
        } => {
            let pair = match (left.as_ref(), right.as_ref()) {
                (col @ Expr::Column { .. }, Expr::Str(s)) => Some((col, s)),
                (Expr::Str(s), col @ Expr::Column { .. }) => Some((col, s)),
                _ => None,
            };
            match pair {
                Some((col, s)) => PredShape::ColEqStr {
                    column: render(col, scope)?,
                    literal: s.clone(),
                },
                None => PredShape::Other,
            }
        }
        Expr::Like {
            expr,
            pattern,
            negated: false,
        } => match (expr.as_ref(), pattern.as_ref()) {
            (col @ Expr::Column { .. }, Expr::Str(p)) => PredShape::ColLikeStr {
                column: render(col, scope)?,
                pattern: p.clone(),
            },
            _ => PredShape::Other,
        },
        _ => PredShape::Other,
    })
}

struct SelectEntry {
    rendered: String,
    normalized: Option<Expr>,
    alias: Option<String>,
}

/// Substitutes select-list aliases for bare column references (ORDER BY,
/// GROUP BY, HAVING can all name an output column).
fn substitute_alias(expr: &Expr, entries: &[SelectEntry]) -> Expr {
    match expr {
        Expr::Column { table: None, name } => {
            let lower = name.to_lowercase();
            for entry in entries {
                if entry.alias.as_deref() == Some(lower.as_str()) {
                    if let Some(ast) = &entry.normalized {
                        return ast.clone();
                    }
                }
            }
            expr.clone()
        }
        Expr::Neg(e) => Expr::Neg(Box::new(substitute_alias(e, entries))),
        Expr::Not(e) => Expr::Not(Box::new(substitute_alias(e, entries))),
        Expr::Binary { left, op, right } => Expr::Binary {
            left: Box::new(substitute_alias(left, entries)),
            op: *op,
            right: Box::new(substitute_alias(right, entries)),
        },
        Expr::Function {
            name,
            distinct,
            star,
            args,
        } => Expr::Function {
            name: name.clone(),
            distinct: *distinct,
            star: *star,
            args: args.iter().map(|a| substitute_alias(a, entries)).collect(),
        },
        Expr::IsNull { expr, negated } => Expr::IsNull {
            expr: Box::new(substitute_alias(expr, entries)),
            negated: *negated,
        },
        Expr::Like {
            expr,
            pattern,
            negated,
        } => Expr::Like {
            expr: Box::new(substitute_alias(expr, entries)),
            pattern: Box::new(substitute_alias(pattern, entries)),
            negated: *negated,
        },
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => Expr::Between {
            expr: Box::new(substitute_alias(expr, entries)),
            low: Box::new(substitute_alias(low, entries)),
            high: Box::new(substitute_alias(high, entries)),
            negated: *negated,
        },
        other => other.clone(),
    }
}

/// Resolves an ORDER BY / GROUP BY ordinal (`ORDER BY 1`) to the rendering
/// of the referenced select item.
fn resolve_ordinal(expr: &Expr, entries: &[SelectEntry]) -> Option<String> {
    if let Expr::Number(raw) = expr {
        if let Ok(k) = raw.parse::<usize>() {
            if k >= 1 && k <= entries.len() {
                return Some(entries[k - 1].rendered.clone());
            }
        }
    }
    None
}

fn canonical_query(query: &Query, parent: Option<&Scope>) -> Result<CanonicalQuery, SqlError> {
    let mut result = canonical_core(
        &query.first,
        &query.order_by,
        query.limit.as_ref(),
        query.offset.as_ref(),
        parent,
    )?;
    for (op, core) in &query.set_tail {
        let tail = canonical_core(core, &[], None, None, parent)?;
        result.set_tail.push((*op, tail));
    }
    Ok(result)
}

fn canonical_core(
    core: &SelectCore,
    order_by: &[OrderItem],
    limit: Option<&Expr>,
    offset: Option<&Expr>,
    parent: Option<&Scope>,
) -> Result<CanonicalQuery, SqlError> {
    let (scope, instances) = build_scope(core.from.as_ref(), parent);

    let mut from_tables: BTreeSet<String> = BTreeSet::new();
    let mut left_joins: Vec<(String, String)> = Vec::new();
    let mut conjuncts: Vec<&Expr> = Vec::new();
    if let Some(where_clause) = &core.where_clause {
        flatten_and(where_clause, &mut conjuncts);
    }
    if let Some(from) = &core.from {
        from_tables.insert(instances[0].clone());
        for (join, instance) in from.joins.iter().zip(instances.iter().skip(1)) {
            match join.kind {
                JoinKind::Inner | JoinKind::Cross => {
                    from_tables.insert(instance.clone());
                    if let Some(on) = &join.on {
                        flatten_and(on, &mut conjuncts);
                    }
                }
                JoinKind::Left => {
                    let on = join.on.as_ref().ok_or_else(|| SqlError::Unsupported {
                        construct: "LEFT JOIN without ON".into(),
                    })?;
                    let normalized = normalize(on, &scope)?;
                    left_joins.push((instance.clone(), render_pred(&normalized, &scope)?));
                }
            }
        }
    }

    let mut entries: Vec<SelectEntry> = Vec::new();
    for item in &core.items {
        match item {
            SelectItem::Wildcard => entries.push(SelectEntry {
                rendered: "*".into(),
                normalized: None,
                alias: None,
            }),
            SelectItem::TableWildcard(table) => {
                let instance = scope.resolve(table).unwrap_or_else(|| table.to_lowercase());
                entries.push(SelectEntry {
                    rendered: format!("{}.*", render_ident(&instance)),
                    normalized: None,
                    alias: None,
                });
            }
            SelectItem::Expr { expr, alias } => {
                let normalized = normalize(expr, &scope)?;
                entries.push(SelectEntry {
                    rendered: render(&normalized, &scope)?,
                    normalized: Some(normalized),
                    alias: alias.as_ref().map(|a| a.to_lowercase()),
                });
            }
        }
    }

    let mut where_conds: Vec<CanonicalPred> = Vec::new();
    for conjunct in conjuncts {
        let normalized = normalize(conjunct, &scope)?;
        where_conds.push(CanonicalPred {
            text: render_pred(&normalized, &scope)?,
            shape: pred_shape(&normalized, &scope)?,
        });
    }
    where_conds.sort_by(|a, b| a.text.cmp(&b.text));
    where_conds.dedup_by(|a, b| a.text == b.text);

    let mut group_by = BTreeSet::new();
    for expr in &core.group_by {
        if let Some(rendered) = resolve_ordinal(expr, &entries) {
            group_by.insert(rendered);
            continue;
        }
        let substituted = substitute_alias(expr, &entries);
        let normalized = normalize(&substituted, &scope)?;
        group_by.insert(render(&normalized, &scope)?);
    }

    let mut having = BTreeSet::new();
    if let Some(having_clause) = &core.having {
        let mut parts = Vec::new();
        flatten_and(having_clause, &mut parts);
        for part in parts {
            let substituted = substitute_alias(part, &entries);
            let normalized = normalize(&substituted, &scope)?;
            having.insert(render_pred(&normalized, &scope)?);
        }
    }

    let mut order_items = Vec::new();
    for item in order_by {
        let direction = if item.descending {
            OrderDirection::Desc
        } else {
            OrderDirection::Asc
        };
        if let Some(rendered) = resolve_ordinal(&item.expr, &entries) {
            order_items.push((rendered, direction));
            continue;
        }
        let substituted = substitute_alias(&item.expr, &entries);
        let normalized = normalize(&substituted, &scope)?;
        order_items.push((render(&normalized, &scope)?, direction));
    }

    let limit = limit
        .map(|e| resolve_count(e, &scope, "LIMIT"))
        .transpose()?;
    let offset = offset
        .map(|e| resolve_count(e, &scope, "OFFSET"))
        .transpose()?;

    Ok(CanonicalQuery {
        distinct: core.distinct,
        select_items: entries.into_iter().map(|e| e.rendered).collect(),
        from_tables,
        left_joins,
        where_conds,
        group_by,
        having,
        order_by: order_items,
        limit,
        offset,
        set_tail: Vec::new(),
    })
}

fn resolve_count(expr: &Expr, scope: &Scope, clause: &str) -> Result<u64, SqlError> {
    let normalized = normalize(expr, scope)?;
    if let Expr::Number(n) = &normalized {
        if let Ok(v) = n.parse::<u64>() {
            return Ok(v);
        }
    }
    Err(SqlError::Unsupported {
        construct: format!("{clause} with a non-constant or negative value"),
    })
}
