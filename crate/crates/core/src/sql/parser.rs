//! Recursive-descent parser for SQLite `SELECT` statements.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{Dialect, FailureReason, ParseFailure};

/// Words that cannot be used as bare identifiers or implicit aliases.
const RESERVED: &[&str] = &[
    "ALL", "AND", "AS", "ASC", "BETWEEN", "BY", "CASE", "CAST", "COLLATE", "CROSS", "CURRENT_DATE",
    "CURRENT_TIME", "CURRENT_TIMESTAMP", "DESC", "DISTINCT", "ELSE", "END", "ESCAPE", "EXCEPT", "EXISTS",
    "FROM", "FULL", "GLOB", "GROUP", "HAVING", "IN", "INNER", "INTERSECT", "IS", "ISNULL", "JOIN", "LEFT",
    "LIKE", "LIMIT", "MATCH", "NATURAL", "NOT", "NOTNULL", "NULL", "OFFSET", "ON", "OR", "ORDER", "OUTER",
    "REGEXP", "RIGHT", "SELECT", "THEN", "UNION", "USING", "VALUES", "WHEN", "WHERE", "WINDOW", "WITH",
];

/// Statement keywords we recognise but do not model.
const UNSUPPORTED_STATEMENTS: &[&str] = &[
    "WITH", "INSERT", "UPDATE", "DELETE", "REPLACE", "CREATE", "DROP", "ALTER", "PRAGMA", "ATTACH",
    "DETACH", "BEGIN", "COMMIT", "ROLLBACK", "VACUUM", "EXPLAIN", "VALUES", "ANALYZE", "REINDEX",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// Parses one SQL statement. Trailing semicolons are accepted.
pub fn parse_sql(text: &str, dialect: Dialect) -> Result<Query, ParseFailure> {
    let Dialect::Sqlite = dialect;
    if text.trim().is_empty() {
        return Err(ParseFailure::new(FailureReason::Empty, "empty input", None));
    }
    let tokens = tokenize(text)
        .map_err(|e| ParseFailure::new(FailureReason::Syntax, e.message, Some(e.offset)))?;
    let end = text.chars().count();
    let mut p = Parser { tokens, pos: 0, end };
    if p.tokens.iter().all(|t| t.tok == Tok::Semicolon) {
        return Err(ParseFailure::new(FailureReason::Empty, "no statement", None));
    }
    if let Some(Tok::Word(w)) = p.peek() {
        if UNSUPPORTED_STATEMENTS.iter().any(|k| k.eq_ignore_ascii_case(w)) {
            return Err(p.unsupported(format!("{} statements are not supported", w.to_ascii_uppercase())));
        }
    }
    let query = p.query()?;
    while p.eat(&Tok::Semicolon) {}
    if let Some(tok) = p.peek() {
        if let Tok::Word(w) = tok {
            if UNSUPPORTED_STATEMENTS.iter().any(|k| k.eq_ignore_ascii_case(w)) {
                return Err(p.unsupported("multiple statements are not supported"));
            }
        }
        return Err(p.syntax(format!("unexpected token `{tok}`")));
    }
    Ok(query)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

type PResult<T> = Result<T, ParseFailure>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + n).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseFailure {
        ParseFailure::new(FailureReason::Syntax, msg, Some(self.offset()))
    }

    fn unsupported(&self, msg: impl Into<String>) -> ParseFailure {
        ParseFailure::new(FailureReason::Unsupported, msg, Some(self.offset()))
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{tok}`")))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseFailure {
        match self.peek() {
            Some(t) => self.syntax(format!("expected {wanted}, found `{t}`")),
            None => self.syntax(format!("expected {wanted}, found end of input")),
        }
    }

    fn peek_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn peek_kw_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_at(n), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.peek_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !is_reserved(&w) => {
                self.pos += 1;
                Ok(Ident { value: w, quoted: false })
            }
            Some(Tok::QuotedIdent(w)) => {
                self.pos += 1;
                Ok(Ident { value: w, quoted: true })
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// `[AS] alias` after a select item or table.
    fn opt_alias(&mut self) -> PResult<Option<Ident>> {
        if self.eat_kw("AS") {
            return match self.peek().cloned() {
                Some(Tok::Str(s)) => {
                    self.pos += 1;
                    Ok(Some(Ident { value: s, quoted: true }))
                }
                _ => self.ident().map(Some),
            };
        }
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !is_reserved(&w) => {
                self.pos += 1;
                Ok(Some(Ident { value: w, quoted: false }))
            }
            Some(Tok::QuotedIdent(w)) | Some(Tok::Str(w)) => {
                self.pos += 1;
                Ok(Some(Ident { value: w, quoted: true }))
            }
            _ => Ok(None),
        }
    }

    fn query(&mut self) -> PResult<Query> {
        let body = self.set_expr()?;
        let mut order_by = Vec::new();
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let expr = self.expr()?;
                if self.peek_kw("NULLS") {
                    return Err(self.unsupported("NULLS FIRST/LAST is not supported"));
                }
                let direction = if self.eat_kw("ASC") {
                    Some(Direction::Asc)
                } else if self.eat_kw("DESC") {
                    Some(Direction::Desc)
                } else {
                    None
                };
                order_by.push(OrderItem { expr, direction });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut limit = None;
        if self.eat_kw("LIMIT") {
            let first = self.expr()?;
            let l = if self.eat_kw("OFFSET") {
                Limit {
                    count: first,
                    offset: Some(self.expr()?),
                }
            } else if self.eat(&Tok::Comma) {
                // LIMIT offset, count
                let count = self.expr()?;
                Limit {
                    count,
                    offset: Some(first),
                }
            } else {
                Limit {
                    count: first,
                    offset: None,
                }
            };
            limit = Some(l);
        }
        Ok(Query { body, order_by, limit })
    }

    fn set_expr(&mut self) -> PResult<SetExpr> {
        let mut left = SetExpr::Select(Box::new(self.select_core()?));
        loop {
            let op = if self.eat_kw("UNION") {
                if self.eat_kw("ALL") {
                    SetOperator::UnionAll
                } else {
                    SetOperator::Union
                }
            } else if self.eat_kw("INTERSECT") {
                SetOperator::Intersect
            } else if self.eat_kw("EXCEPT") {
                SetOperator::Except
            } else {
                break;
            };
            let right = SetExpr::Select(Box::new(self.select_core()?));
            left = SetExpr::Compound {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn select_core(&mut self) -> PResult<Select> {
        if self.peek_kw("VALUES") {
            return Err(self.unsupported("VALUES is not supported"));
        }
        self.expect_kw("SELECT")?;
        let distinct = if self.eat_kw("DISTINCT") {
            true
        } else {
            self.eat_kw("ALL");
            false
        };
        let mut projection = Vec::new();
        loop {
            projection.push(self.select_item()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let from = if self.eat_kw("FROM") {
            Some(self.parse_from()?)
        } else {
            None
        };
        let selection = if self.eat_kw("WHERE") {
            Some(self.expr()?)
        } else {
            None
        };
        let mut group_by = Vec::new();
        if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            loop {
                group_by.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let having = if self.eat_kw("HAVING") {
            Some(self.expr()?)
        } else {
            None
        };
        if self.peek_kw("WINDOW") {
            return Err(self.unsupported("WINDOW clauses are not supported"));
        }
        Ok(Select {
            distinct,
            projection,
            from,
            selection,
            group_by,
            having,
        })
    }

    fn select_item(&mut self) -> PResult<SelectItem> {
        if self.eat(&Tok::Star) {
            return Ok(SelectItem::Wildcard);
        }
        if matches!(self.peek(), Some(Tok::Word(_)) | Some(Tok::QuotedIdent(_)))
            && self.peek_at(1) == Some(&Tok::Dot)
            && self.peek_at(2) == Some(&Tok::Star)
        {
            let table = self.ident()?;
            self.pos += 2;
            return Ok(SelectItem::QualifiedWildcard(table));
        }
        let expr = self.expr()?;
        let alias = self.opt_alias()?;
        Ok(SelectItem::Expr { expr, alias })
    }

    fn parse_from(&mut self) -> PResult<TableRef> {
        let mut left = self.table_factor()?;
        loop {
            let kind = if self.eat(&Tok::Comma) {
                JoinKind::Comma
            } else if self.eat_kw("JOIN") {
                JoinKind::Inner
            } else if self.peek_kw("INNER") {
                self.pos += 1;
                self.expect_kw("JOIN")?;
                JoinKind::Inner
            } else if self.peek_kw("CROSS") {
                self.pos += 1;
                self.expect_kw("JOIN")?;
                JoinKind::Cross
            } else if self.peek_kw("LEFT") || self.peek_kw("RIGHT") || self.peek_kw("FULL") {
                let kind = if self.eat_kw("LEFT") {
                    JoinKind::Left
                } else if self.eat_kw("RIGHT") {
                    JoinKind::Right
                } else {
                    self.pos += 1;
                    JoinKind::Full
                };
                self.eat_kw("OUTER");
                self.expect_kw("JOIN")?;
                kind
            } else if self.peek_kw("NATURAL") {
                self.pos += 1;
                if !self.eat_kw("JOIN") {
                    return Err(self.unsupported("only plain NATURAL JOIN is supported"));
                }
                JoinKind::Natural
            } else {
                break;
            };
            let right = self.table_factor()?;
            let constraint = if self.eat_kw("ON") {
                JoinConstraint::On(self.expr()?)
            } else if self.eat_kw("USING") {
                self.expect(&Tok::LParen)?;
                let mut cols = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    cols.push(self.ident()?);
                }
                self.expect(&Tok::RParen)?;
                JoinConstraint::Using(cols)
            } else {
                JoinConstraint::None
            };
            left = TableRef::Join {
                left: Box::new(left),
                right: Box::new(right),
                kind,
                constraint,
            };
        }
        Ok(left)
    }

    fn table_factor(&mut self) -> PResult<TableRef> {
        if self.eat(&Tok::LParen) {
            if self.peek_kw("SELECT") {
                let query = self.query()?;
                self.expect(&Tok::RParen)?;
                let alias = self.opt_alias()?;
                return Ok(TableRef::Derived {
                    query: Box::new(query),
                    alias,
                });
            }
            let inner = self.parse_from()?;
            self.expect(&Tok::RParen)?;
            return Ok(inner);
        }
        let name = self.ident()?;
        if self.peek() == Some(&Tok::Dot) {
            return Err(self.unsupported("schema-qualified table names are not supported"));
        }
        if self.peek() == Some(&Tok::LParen) {
            return Err(self.unsupported("table-valued functions are not supported"));
        }
        let alias = self.opt_alias()?;
        if self.peek_kw("INDEXED") {
            return Err(self.unsupported("INDEXED BY is not supported"));
        }
        Ok(TableRef::Table { name, alias })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut left = self.and_expr()?;
        while self.eat_kw("OR") {
            let right = self.and_expr()?;
            left = Expr::binary(BinaryOp::Or, left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut left = self.not_expr()?;
        while self.eat_kw("AND") {
            let right = self.not_expr()?;
            left = Expr::binary(BinaryOp::And, left, right);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.peek_kw("NOT") {
            if self.peek_kw_at(1, "EXISTS") {
                // handled as a primary so `NOT EXISTS (...)` stays one node
                return self.equality_expr();
            }
            self.pos += 1;
            let expr = self.not_expr()?;
            return Ok(Expr::Unary {
                op: UnaryOp::Not,
                expr: Box::new(expr),
            });
        }
        self.equality_expr()
    }

    fn equality_expr(&mut self) -> PResult<Expr> {
        let mut left = self.relational_expr()?;
        loop {
            let negated = self.peek_kw("NOT")
                && (self.peek_kw_at(1, "IN")
                    || self.peek_kw_at(1, "LIKE")
                    || self.peek_kw_at(1, "GLOB")
                    || self.peek_kw_at(1, "REGEXP")
                    || self.peek_kw_at(1, "MATCH")
                    || self.peek_kw_at(1, "BETWEEN")
                    || self.peek_kw_at(1, "NULL"));
            if negated {
                self.pos += 1;
            }
            if self.eat(&Tok::Eq) {
                let right = self.relational_expr()?;
                left = Expr::binary(BinaryOp::Eq, left, right);
            } else if self.eat(&Tok::NotEq) {
                let right = self.relational_expr()?;
                left = Expr::binary(BinaryOp::NotEq, left, right);
            } else if self.eat_kw("IS") {
                let not = self.eat_kw("NOT");
                if self.peek_kw("DISTINCT") {
                    return Err(self.unsupported("IS DISTINCT FROM is not supported"));
                }
                let right = self.relational_expr()?;
                left = if right == Expr::Literal(Literal::Null) {
                    Expr::IsNull {
                        expr: Box::new(left),
                        negated: not,
                    }
                } else {
                    Expr::binary(if not { BinaryOp::IsNot } else { BinaryOp::Is }, left, right)
                };
            } else if self.eat_kw("ISNULL") {
                left = Expr::IsNull {
                    expr: Box::new(left),
                    negated: false,
                };
            } else if self.eat_kw("NOTNULL") || (negated && self.eat_kw("NULL")) {
                left = Expr::IsNull {
                    expr: Box::new(left),
                    negated: true,
                };
            } else if self.eat_kw("IN") {
                left = self.in_rhs(left, negated)?;
            } else if let Some(op) = self.pattern_op() {
                let pattern = self.relational_expr()?;
                let escape = if self.eat_kw("ESCAPE") {
                    Some(Box::new(self.relational_expr()?))
                } else {
                    None
                };
                left = Expr::Pattern {
                    op,
                    negated,
                    expr: Box::new(left),
                    pattern: Box::new(pattern),
                    escape,
                };
            } else if self.eat_kw("BETWEEN") {
                let low = self.relational_expr()?;
                self.expect_kw("AND")?;
                let high = self.relational_expr()?;
                left = Expr::Between {
                    expr: Box::new(left),
                    low: Box::new(low),
                    high: Box::new(high),
                    negated,
                };
            } else {
                if negated {
                    self.pos -= 1;
                }
                break;
            }
        }
        Ok(left)
    }

    fn pattern_op(&mut self) -> Option<PatternOp> {
        let op = if self.peek_kw("LIKE") {
            PatternOp::Like
        } else if self.peek_kw("GLOB") {
            PatternOp::Glob
        } else if self.peek_kw("REGEXP") {
            PatternOp::Regexp
        } else if self.peek_kw("MATCH") {
            PatternOp::Match
        } else {
            return None;
        };
        self.pos += 1;
        Some(op)
    }

    fn in_rhs(&mut self, left: Expr, negated: bool) -> PResult<Expr> {
        if self.peek() != Some(&Tok::LParen) {
            return Err(self.unsupported("IN requires a parenthesised list or subquery"));
        }
        self.pos += 1;
        if self.peek_kw("SELECT") {
            let query = self.query()?;
            self.expect(&Tok::RParen)?;
            return Ok(Expr::InSubquery {
                expr: Box::new(left),
                query: Box::new(query),
                negated,
            });
        }
        let mut list = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                list.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(Expr::InList {
            expr: Box::new(left),
            list,
            negated,
        })
    }

    fn relational_expr(&mut self) -> PResult<Expr> {
        let mut left = self.bitwise_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Lt) => BinaryOp::Lt,
                Some(Tok::LtEq) => BinaryOp::LtEq,
                Some(Tok::Gt) => BinaryOp::Gt,
                Some(Tok::GtEq) => BinaryOp::GtEq,
                _ => break,
            };
            self.pos += 1;
            let right = self.bitwise_expr()?;
            left = Expr::binary(op, left, right);
        }
        Ok(left)
    }

    fn bitwise_expr(&mut self) -> PResult<Expr> {
        let mut left = self.additive_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::BitAnd) => BinaryOp::BitAnd,
                Some(Tok::BitOr) => BinaryOp::BitOr,
                Some(Tok::ShiftLeft) => BinaryOp::ShiftLeft,
                Some(Tok::ShiftRight) => BinaryOp::ShiftRight,
                _ => break,
            };
            self.pos += 1;
            let right = self.additive_expr()?;
            left = Expr::binary(op, left, right);
        }
        Ok(left)
    }

    fn additive_expr(&mut self) -> PResult<Expr> {
        let mut left = self.multiplicative_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Plus,
                Some(Tok::Minus) => BinaryOp::Minus,
                _ => break,
            };
            self.pos += 1;
            let right = self.multiplicative_expr()?;
            left = Expr::binary(op, left, right);
        }
        Ok(left)
    }

    fn multiplicative_expr(&mut self) -> PResult<Expr> {
        let mut left = self.concat_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Multiply,
                Some(Tok::Slash) => BinaryOp::Divide,
                Some(Tok::Percent) => BinaryOp::Modulo,
                _ => break,
            };
            self.pos += 1;
            let right = self.concat_expr()?;
            left = Expr::binary(op, left, right);
        }
        Ok(left)
    }

    fn concat_expr(&mut self) -> PResult<Expr> {
        let mut left = self.unary_expr()?;
        while self.eat(&Tok::Concat) {
            let right = self.unary_expr()?;
            left = Expr::binary(BinaryOp::Concat, left, right);
        }
        Ok(left)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Some(Tok::Minus) => UnaryOp::Neg,
            Some(Tok::Plus) => UnaryOp::Plus,
            Some(Tok::Tilde) => UnaryOp::BitNot,
            _ => return self.postfix_expr(),
        };
        self.pos += 1;
        let expr = self.unary_expr()?;
        Ok(Expr::Unary {
            op,
            expr: Box::new(expr),
        })
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let mut expr = self.primary()?;
        while self.eat_kw("COLLATE") {
            let collation = self.ident()?;
            expr = Expr::Collate {
                expr: Box::new(expr),
                collation,
            };
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("expression"));
        };
        match tok {
            Tok::Number(n) => {
                self.pos += 1;
                Ok(Expr::Literal(Literal::Number(n)))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok(Expr::Literal(Literal::String(s)))
            }
            Tok::Param => Err(self.unsupported("bound parameters are not supported")),
            Tok::LParen => {
                self.pos += 1;
                if self.peek_kw("SELECT") {
                    let q = self.query()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::Subquery(Box::new(q)));
                }
                let e = self.expr()?;
                if self.peek() == Some(&Tok::Comma) {
                    return Err(self.unsupported("row values are not supported"));
                }
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::QuotedIdent(_) => self.column_ref(),
            Tok::Word(w) => {
                let upper = w.to_ascii_uppercase();
                match upper.as_str() {
                    "NULL" => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::Null))
                    }
                    "TRUE" if self.peek_at(1) != Some(&Tok::Dot) => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::True))
                    }
                    "FALSE" if self.peek_at(1) != Some(&Tok::Dot) => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::False))
                    }
                    "CURRENT_DATE" => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::CurrentDate))
                    }
                    "CURRENT_TIME" => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::CurrentTime))
                    }
                    "CURRENT_TIMESTAMP" => {
                        self.pos += 1;
                        Ok(Expr::Literal(Literal::CurrentTimestamp))
                    }
                    "CASE" => self.case_expr(),
                    "CAST" => self.cast_expr(),
                    "EXISTS" => {
                        self.pos += 1;
                        self.exists_body(false)
                    }
                    "NOT" if self.peek_kw_at(1, "EXISTS") => {
                        self.pos += 2;
                        self.exists_body(true)
                    }
                    "SELECT" => Err(self.syntax("subquery must be parenthesised")),
                    "RAISE" => Err(self.unsupported("RAISE is not supported")),
                    _ if self.peek_at(1) == Some(&Tok::LParen) && !is_reserved(&w) => self.function_call(),
                    _ => self.column_ref(),
                }
            }
            other => Err(self.syntax(format!("unexpected token `{other}`"))),
        }
    }

    fn exists_body(&mut self, negated: bool) -> PResult<Expr> {
        self.expect(&Tok::LParen)?;
        let query = self.query()?;
        self.expect(&Tok::RParen)?;
        Ok(Expr::Exists {
            query: Box::new(query),
            negated,
        })
    }

    fn column_ref(&mut self) -> PResult<Expr> {
        let first = self.ident()?;
        if self.eat(&Tok::Dot) {
            let second = self.ident()?;
            if self.peek() == Some(&Tok::Dot) {
                return Err(self.unsupported("schema-qualified column references are not supported"));
            }
            return Ok(Expr::Column {
                table: Some(first),
                name: second,
            });
        }
        Ok(Expr::Column {
            table: None,
            name: first,
        })
    }

    fn function_call(&mut self) -> PResult<Expr> {
        let name = self.ident()?;
        self.expect(&Tok::LParen)?;
        let args = if self.eat(&Tok::Star) {
            FunctionArgs::Star
        } else {
            let distinct = self.eat_kw("DISTINCT");
            if !distinct {
                self.eat_kw("ALL");
            }
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            if distinct && args.is_empty() {
                return Err(self.unexpected("expression"));
            }
            FunctionArgs::List { distinct, args }
        };
        if self.peek_kw("ORDER") {
            return Err(self.unsupported("ordered aggregates are not supported"));
        }
        self.expect(&Tok::RParen)?;
        if self.peek_kw("OVER") || self.peek_kw("FILTER") {
            return Err(self.unsupported("window functions are not supported"));
        }
        Ok(Expr::Function { name, args })
    }

    fn case_expr(&mut self) -> PResult<Expr> {
        self.expect_kw("CASE")?;
        let operand = if self.peek_kw("WHEN") {
            None
        } else {
            Some(Box::new(self.expr()?))
        };
        let mut branches = Vec::new();
        while self.eat_kw("WHEN") {
            let cond = self.expr()?;
            self.expect_kw("THEN")?;
            let result = self.expr()?;
            branches.push((cond, result));
        }
        if branches.is_empty() {
            return Err(self.unexpected("WHEN"));
        }
        let else_result = if self.eat_kw("ELSE") {
            Some(Box::new(self.expr()?))
        } else {
            None
        };
        self.expect_kw("END")?;
        Ok(Expr::Case {
            operand,
            branches,
            else_result,
        })
    }

    fn cast_expr(&mut self) -> PResult<Expr> {
        self.expect_kw("CAST")?;
        self.expect(&Tok::LParen)?;
        let expr = self.expr()?;
        self.expect_kw("AS")?;
        let mut words = Vec::new();
        while let Some(Tok::Word(w)) = self.peek().cloned() {
            self.pos += 1;
            words.push(w.to_ascii_uppercase());
        }
        if words.is_empty() {
            return Err(self.unexpected("type name"));
        }
        let mut type_name = words.join(" ");
        if self.eat(&Tok::LParen) {
            let mut parts = Vec::new();
            loop {
                match self.advance() {
                    Some(Tok::Number(n)) => parts.push(n),
                    _ => return Err(self.syntax("expected numeric type size")),
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
            type_name = format!("{type_name}({})", parts.join(", "));
        }
        self.expect(&Tok::RParen)?;
        Ok(Expr::Cast {
            expr: Box::new(expr),
            type_name,
        })
    }
}
