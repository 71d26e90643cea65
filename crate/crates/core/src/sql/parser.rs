//! Recursive-descent parser producing the [`ast`](super::ast) types.
//! Errors carry the byte offset of the offending token.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::SqlError;

/// Words that cannot serve as bare identifiers. Deliberately small so that
/// real-world column names like `match` or `year` parse unquoted.
const RESERVED: &[&str] = &[
    "select",
    "from",
    "where",
    "group",
    "by",
    "having",
    "order",
    "limit",
    "offset",
    "union",
    "intersect",
    "except",
    "join",
    "inner",
    "left",
    "right",
    "full",
    "outer",
    "cross",
    "on",
    "as",
    "and",
    "or",
    "not",
    "in",
    "is",
    "null",
    "between",
    "like",
    "distinct",
    "all",
    "asc",
    "desc",
    "exists",
    "case",
    "when",
    "then",
    "else",
    "end",
    "with",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| word.eq_ignore_ascii_case(r))
}

pub fn parse_statement(text: &str) -> Result<Statement, SqlError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    if parser.at_word("with") {
        return Err(SqlError::Unsupported {
            construct: "WITH (common table expressions)".into(),
        });
    }
    let query = parser.parse_query()?;
    parser.eat(&TokenKind::Semi);
    if !parser.at(&TokenKind::Eof) {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(Statement { query })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_ahead(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let token = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        token
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek().kind == *kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<Token, SqlError> {
        if self.at(kind) {
            Ok(self.advance())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(word))
    }

    fn at_word_ahead(&self, n: usize, word: &str) -> bool {
        matches!(&self.peek_ahead(n).kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(word))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.at_word(word) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), SqlError> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {}", word.to_uppercase())))
        }
    }

    fn error(&self, message: &str) -> SqlError {
        SqlError::Syntax {
            offset: self.peek().offset,
            message: message.to_string(),
        }
    }

    /// Identifier: bare non-reserved word or any quoted token.
    fn identifier(&mut self, what: &str) -> Result<String, SqlError> {
        match &self.peek().kind {
            TokenKind::Word(w) if !is_reserved(w) => {
                let name = w.clone();
                self.advance();
                Ok(name)
            }
            TokenKind::Quoted(q) if !q.is_empty() => {
                let name = q.clone();
                self.advance();
                Ok(name)
            }
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn parse_query(&mut self) -> Result<Query, SqlError> {
        let first = self.parse_select_core()?;
        let mut set_tail = Vec::new();
        loop {
            let op = if self.eat_word("union") {
                if self.eat_word("all") {
                    SetOperator::UnionAll
                } else {
                    SetOperator::Union
                }
            } else if self.eat_word("intersect") {
                SetOperator::Intersect
            } else if self.eat_word("except") {
                SetOperator::Except
            } else {
                break;
            };
            set_tail.push((op, self.parse_select_core()?));
        }

        let mut order_by = Vec::new();
        if self.eat_word("order") {
            self.expect_word("by")?;
            loop {
                let expr = self.parse_expr()?;
                let descending = if self.eat_word("desc") {
                    true
                } else {
                    self.eat_word("asc");
                    false
                };
                order_by.push(OrderItem { expr, descending });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }

        let mut limit = None;
        let mut offset = None;
        if self.eat_word("limit") {
            let first_expr = self.parse_expr()?;
            if self.eat(&TokenKind::Comma) {
                // LIMIT <offset>, <limit>
                offset = Some(first_expr);
                limit = Some(self.parse_expr()?);
            } else {
                limit = Some(first_expr);
                if self.eat_word("offset") {
                    offset = Some(self.parse_expr()?);
                }
            }
        }

        Ok(Query {
            first,
            set_tail,
            order_by,
            limit,
            offset,
        })
    }

    fn parse_select_core(&mut self) -> Result<SelectCore, SqlError> {
        self.expect_word("select")?;
        let distinct = if self.eat_word("distinct") {
            true
        } else {
            self.eat_word("all");
            false
        };

        let mut items = Vec::new();
        loop {
            items.push(self.parse_select_item()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }

        let from = if self.eat_word("from") {
            Some(self.parse_from()?)
        } else {
            None
        };

        let where_clause = if self.eat_word("where") {
            Some(self.parse_expr()?)
        } else {
            None
        };

        let mut group_by = Vec::new();
        if self.eat_word("group") {
            self.expect_word("by")?;
            loop {
                group_by.push(self.parse_expr()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }

        let having = if self.eat_word("having") {
            Some(self.parse_expr()?)
        } else {
            None
        };

        Ok(SelectCore {
            distinct,
            items,
            from,
            where_clause,
            group_by,
            having,
        })
    }

    fn parse_select_item(&mut self) -> Result<SelectItem, SqlError> {
        if self.eat(&TokenKind::Star) {
            return Ok(SelectItem::Wildcard);
        }
        // table.* needs two tokens of lookahead before committing.
        if let TokenKind::Word(w) = &self.peek().kind {
            if !is_reserved(w)
                && self.peek_ahead(1).kind == TokenKind::Dot
                && self.peek_ahead(2).kind == TokenKind::Star
            {
                let table = w.clone();
                self.advance();
                self.advance();
                self.advance();
                return Ok(SelectItem::TableWildcard(table));
            }
        }
        let expr = self.parse_expr()?;
        let alias = if self.eat_word("as") {
            Some(self.identifier("alias after AS")?)
        } else {
            match &self.peek().kind {
                TokenKind::Word(w) if !is_reserved(w) => {
                    let alias = w.clone();
                    self.advance();
                    Some(alias)
                }
                TokenKind::Quoted(q) if !q.is_empty() => {
                    let alias = q.clone();
                    self.advance();
                    Some(alias)
                }
                _ => None,
            }
        };
        Ok(SelectItem::Expr { expr, alias })
    }

    fn parse_from(&mut self) -> Result<FromClause, SqlError> {
        let first = self.parse_table_ref()?;
        let mut joins = Vec::new();
        loop {
            if self.eat(&TokenKind::Comma) {
                joins.push(Join {
                    kind: JoinKind::Inner,
                    table: self.parse_table_ref()?,
                    on: None,
                });
                continue;
            }
            let kind = if self.at_word("join") || self.at_word("inner") {
                self.eat_word("inner");
                JoinKind::Inner
            } else if self.at_word("cross") {
                self.advance();
                JoinKind::Cross
            } else if self.at_word("left") {
                self.advance();
                self.eat_word("outer");
                JoinKind::Left
            } else if self.at_word("right") || self.at_word("full") {
                return Err(SqlError::Unsupported {
                    construct: "RIGHT/FULL OUTER JOIN".into(),
                });
            } else {
                break;
            };
            self.expect_word("join")?;
            let table = self.parse_table_ref()?;
            let on = if self.eat_word("on") {
                Some(self.parse_expr()?)
            } else {
                None
            };
            joins.push(Join { kind, table, on });
        }
        Ok(FromClause { first, joins })
    }

    fn parse_table_ref(&mut self) -> Result<TableRef, SqlError> {
        if self.at(&TokenKind::LParen) {
            return Err(SqlError::Unsupported {
                construct: "subquery in FROM".into(),
            });
        }
        let name = self.identifier("table name")?;
        let alias = if self.eat_word("as") {
            Some(self.identifier("alias after AS")?)
        } else {
            match &self.peek().kind {
                TokenKind::Word(w) if !is_reserved(w) => {
                    let alias = w.clone();
                    self.advance();
                    Some(alias)
                }
                _ => None,
            }
        };
        Ok(TableRef { name, alias })
    }

    pub(super) fn parse_expr(&mut self) -> Result<Expr, SqlError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.parse_and()?;
        while self.eat_word("or") {
            let right = self.parse_and()?;
            left = Expr::Binary {
                left: Box::new(left),
                op: BinOp::Or,
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.parse_not()?;
        while self.eat_word("and") {
            let right = self.parse_not()?;
            left = Expr::Binary {
                left: Box::new(left),
                op: BinOp::And,
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> Result<Expr, SqlError> {
        if self.at_word("not") && !self.at_word_ahead(1, "exists") {
            self.advance();
            return Ok(Expr::Not(Box::new(self.parse_not()?)));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Result<Expr, SqlError> {
        let left = self.parse_additive()?;

        let negated = if self.at_word("not")
            && (self.at_word_ahead(1, "like")
                || self.at_word_ahead(1, "in")
                || self.at_word_ahead(1, "between"))
        {
            self.advance();
            true
        } else {
            false
        };

        if self.eat_word("like") {
            let pattern = self.parse_additive()?;
            return Ok(Expr::Like {
                expr: Box::new(left),
                pattern: Box::new(pattern),
                negated,
            });
        }
        if self.eat_word("in") {
            self.expect(&TokenKind::LParen, "( after IN")?;
            if self.at_word("select") {
                let query = self.parse_query()?;
                self.expect(&TokenKind::RParen, ") after subquery")?;
                return Ok(Expr::InSubquery {
                    expr: Box::new(left),
                    query: Box::new(query),
                    negated,
                });
            }
            let mut items = Vec::new();
            if !self.at(&TokenKind::RParen) {
                loop {
                    items.push(self.parse_expr()?);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(&TokenKind::RParen, ") after IN list")?;
            return Ok(Expr::InList {
                expr: Box::new(left),
                items,
                negated,
            });
        }
        if self.eat_word("between") {
            let low = self.parse_additive()?;
            self.expect_word("and")?;
            let high = self.parse_additive()?;
            return Ok(Expr::Between {
                expr: Box::new(left),
                low: Box::new(low),
                high: Box::new(high),
                negated,
            });
        }
        if negated {
            return Err(self.error("expected LIKE, IN, or BETWEEN after NOT"));
        }
        if self.eat_word("is") {
            let negated = self.eat_word("not");
            self.expect_word("null")?;
            return Ok(Expr::IsNull {
                expr: Box::new(left),
                negated,
            });
        }

        let op = match self.peek().kind {
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Neq => BinOp::Neq,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            _ => return Ok(left),
        };
        self.advance();
        let right = self.parse_additive()?;
        Ok(Expr::Binary {
            left: Box::new(left),
            op,
            right: Box::new(right),
        })
    }

    fn parse_additive(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.parse_multiplicative()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                TokenKind::Concat => BinOp::Concat,
                _ => break,
            };
            self.advance();
            let right = self.parse_multiplicative()?;
            left = Expr::Binary {
                left: Box::new(left),
                op,
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn parse_multiplicative(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.parse_unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::Percent => BinOp::Mod,
                _ => break,
            };
            self.advance();
            let right = self.parse_unary()?;
            left = Expr::Binary {
                left: Box::new(left),
                op,
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Expr, SqlError> {
        if self.eat(&TokenKind::Minus) {
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        if self.eat(&TokenKind::Plus) {
            return self.parse_unary();
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, SqlError> {
        match self.peek().kind.clone() {
            TokenKind::Number(raw) => {
                self.advance();
                Ok(Expr::Number(raw))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            TokenKind::LParen => {
                self.advance();
                if self.at_word("select") {
                    let query = self.parse_query()?;
                    self.expect(&TokenKind::RParen, ") after subquery")?;
                    return Ok(Expr::Subquery(Box::new(query)));
                }
                let expr = self.parse_expr()?;
                self.expect(&TokenKind::RParen, ") after expression")?;
                Ok(expr)
            }
            TokenKind::Quoted(q) => {
                self.advance();
                if q.is_empty() {
                    // SQLite resolves an empty double-quoted token as the
                    // empty string literal; gold answers with `= ""` rely
                    // on this.
                    return Ok(Expr::Str(String::new()));
                }
                self.finish_column_or_call(q)
            }
            TokenKind::Word(w) => {
                if w.eq_ignore_ascii_case("null") {
                    self.advance();
                    return Ok(Expr::Null);
                }
                if w.eq_ignore_ascii_case("case") {
                    return Err(SqlError::Unsupported {
                        construct: "CASE expression".into(),
                    });
                }
                if w.eq_ignore_ascii_case("exists")
                    || (w.eq_ignore_ascii_case("not") && self.at_word_ahead(1, "exists"))
                {
                    let negated = self.eat_word("not");
                    self.expect_word("exists")?;
                    self.expect(&TokenKind::LParen, "( after EXISTS")?;
                    let query = self.parse_query()?;
                    self.expect(&TokenKind::RParen, ") after subquery")?;
                    return Ok(Expr::Exists {
                        query: Box::new(query),
                        negated,
                    });
                }
                if is_reserved(&w) {
                    return Err(self.error(&format!("unexpected keyword {}", w.to_uppercase())));
                }
                self.advance();
                self.finish_column_or_call(w)
            }
            _ => Err(self.error("expected expression")),
        }
    }

    /// Continues a primary that began with an identifier: a function call,
    /// a qualified column, or a bare column.
    fn finish_column_or_call(&mut self, name: String) -> Result<Expr, SqlError> {
        if self.eat(&TokenKind::LParen) {
            if self.eat(&TokenKind::Star) {
                self.expect(&TokenKind::RParen, ") after *")?;
                return Ok(Expr::Function {
                    name,
                    distinct: false,
                    star: true,
                    args: Vec::new(),
                });
            }
            let distinct = self.eat_word("distinct");
            let mut args = Vec::new();
            if !self.at(&TokenKind::RParen) {
                loop {
                    args.push(self.parse_expr()?);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(&TokenKind::RParen, ") after arguments")?;
            return Ok(Expr::Function {
                name,
                distinct,
                star: false,
                args,
            });
        }
        if self.at(&TokenKind::Dot) && self.peek_ahead(1).kind != TokenKind::Star {
            self.advance();
            let column = self.identifier("column name after .")?;
            return Ok(Expr::Column {
                table: Some(name),
                name: column,
            });
        }
        Ok(Expr::Column { table: None, name })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_gold_query() {
        let stmt = parse_statement(
            "SELECT YEAR FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1",
        )
        .unwrap();
        let q = stmt.query;
        assert_eq!(q.first.group_by.len(), 1);
        assert_eq!(q.order_by.len(), 1);
        assert!(q.order_by[0].descending);
        assert!(matches!(
            q.order_by[0].expr,
            Expr::Function { ref name, star: true, .. } if name == "count"
        ));
        assert_eq!(q.limit, Some(Expr::Number("1".into())));
    }

    #[test]
    fn parses_minimal_select() {
        let stmt = parse_statement("SELECT 1").unwrap();
        assert_eq!(stmt.query.first.items.len(), 1);
        assert!(stmt.query.first.from.is_none());
    }

    #[test]
    fn misspelled_select_errors_at_offset_zero() {
        match parse_statement("SELEC year").unwrap_err() {
            SqlError::Syntax { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_joins_and_predicates() {
        let stmt = parse_statement(
            "SELECT b.match FROM betfront b JOIN football_data f ON b.country = f.country \
             WHERE b.year > 2010 AND f.bwd IS NOT NULL",
        )
        .unwrap();
        let from = stmt.query.first.from.unwrap();
        assert_eq!(from.first.alias.as_deref(), Some("b"));
        assert_eq!(from.joins.len(), 1);
        assert!(from.joins[0].on.is_some());
    }

    #[test]
    fn parses_set_operations_left_associatively() {
        let stmt = parse_statement(
            "SELECT country FROM betfront UNION SELECT country FROM football_data \
             EXCEPT SELECT country FROM betfront WHERE year = 2009",
        )
        .unwrap();
        let ops: Vec<SetOperator> = stmt.query.set_tail.iter().map(|(op, _)| *op).collect();
        assert_eq!(ops, vec![SetOperator::Union, SetOperator::Except]);
    }

    #[test]
    fn parses_in_between_like() {
        let stmt = parse_statement(
            "SELECT match FROM betfront WHERE year IN (2009, 2010) \
             AND home_opening BETWEEN 1 AND 3 AND match NOT LIKE '%Spain%'",
        )
        .unwrap();
        let where_clause = stmt.query.first.where_clause.unwrap();
        let rendered = format!("{where_clause:?}");
        assert!(rendered.contains("InList"));
        assert!(rendered.contains("Between"));
        assert!(rendered.contains("negated: true"));
    }

    #[test]
    fn parses_subquery_in_predicate() {
        let stmt = parse_statement(
            "SELECT match FROM betfront WHERE country IN \
             (SELECT country FROM football_data WHERE bwd > 3)",
        )
        .unwrap();
        assert!(matches!(
            stmt.query.first.where_clause,
            Some(Expr::InSubquery { .. })
        ));
    }

    #[test]
    fn empty_double_quote_parses_as_empty_string() {
        let stmt = parse_statement("SELECT * FROM t WHERE outcome = \"\"").unwrap();
        match stmt.query.first.where_clause.unwrap() {
            Expr::Binary { right, .. } => assert_eq!(*right, Expr::Str(String::new())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupported_constructs_are_flagged() {
        assert!(matches!(
            parse_statement("WITH x AS (SELECT 1) SELECT * FROM x"),
            Err(SqlError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_statement("SELECT * FROM (SELECT 1)"),
            Err(SqlError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_statement("SELECT CASE WHEN 1 THEN 2 END"),
            Err(SqlError::Unsupported { .. })
        ));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        assert!(matches!(
            parse_statement("SELECT 1 blah blah"),
            Err(SqlError::Syntax { .. })
        ));
    }

    #[test]
    fn table_wildcard_and_aliases() {
        let stmt = parse_statement("SELECT b.*, year y FROM betfront AS b").unwrap();
        assert!(matches!(stmt.query.first.items[0], SelectItem::TableWildcard(ref t) if t == "b"));
        assert!(matches!(
            stmt.query.first.items[1],
            SelectItem::Expr { alias: Some(ref a), .. } if a == "y"
        ));
    }
}
