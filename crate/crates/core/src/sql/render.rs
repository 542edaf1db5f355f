//! Deterministic SQL rendering.
//!
//! Output uses single spaces between tokens, uppercase keywords and only
//! the parentheses that precedence requires. Surface synonyms collapse to
//! one spelling: `==` renders as `=`, `!=` as `<>`, `INNER JOIN` as `JOIN`,
//! `LIMIT o, n` as `LIMIT n OFFSET o`, and an explicit `ASC` is dropped.

use std::fmt::Write;

use super::ast::*;
use super::parser::is_reserved;

pub fn render_query(q: &Query) -> String {
    let mut out = String::new();
    write_query(&mut out, q);
    out
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

/// Bare when word-like and not a keyword, otherwise double-quoted.
pub fn quote_ident(value: &str) -> String {
    let wordlike = value
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    let keyword = is_reserved(value)
        || ["TRUE", "FALSE"].iter().any(|k| k.eq_ignore_ascii_case(value));
    if wordlike && !keyword {
        value.to_string()
    } else {
        format!("\"{}\"", value.replace('"', "\"\""))
    }
}

fn ident(out: &mut String, id: &Ident) {
    out.push_str(&quote_ident(&id.value));
}

fn write_query(out: &mut String, q: &Query) {
    write_set_expr(out, &q.body);
    if !q.order_by.is_empty() {
        out.push_str(" ORDER BY ");
        for (i, item) in q.order_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_expr(out, &item.expr, 0);
            if item.direction == Some(Direction::Desc) {
                out.push_str(" DESC");
            }
        }
    }
    if let Some(limit) = &q.limit {
        out.push_str(" LIMIT ");
        write_expr(out, &limit.count, 0);
        if let Some(off) = &limit.offset {
            out.push_str(" OFFSET ");
            write_expr(out, off, 0);
        }
    }
}

fn write_set_expr(out: &mut String, s: &SetExpr) {
    match s {
        SetExpr::Select(sel) => write_select(out, sel),
        SetExpr::Compound { op, left, right } => {
            write_set_expr(out, left);
            out.push_str(match op {
                SetOperator::Union => " UNION ",
                SetOperator::UnionAll => " UNION ALL ",
                SetOperator::Intersect => " INTERSECT ",
                SetOperator::Except => " EXCEPT ",
            });
            write_set_expr(out, right);
        }
    }
}

fn write_select(out: &mut String, s: &Select) {
    out.push_str("SELECT ");
    if s.distinct {
        out.push_str("DISTINCT ");
    }
    for (i, item) in s.projection.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match item {
            SelectItem::Wildcard => out.push('*'),
            SelectItem::QualifiedWildcard(t) => {
                ident(out, t);
                out.push_str(".*");
            }
            SelectItem::Expr { expr, alias } => {
                write_expr(out, expr, 0);
                if let Some(a) = alias {
                    out.push_str(" AS ");
                    ident(out, a);
                }
            }
        }
    }
    if let Some(from) = &s.from {
        out.push_str(" FROM ");
        write_table_ref(out, from);
    }
    if let Some(w) = &s.selection {
        out.push_str(" WHERE ");
        write_expr(out, w, 0);
    }
    if !s.group_by.is_empty() {
        out.push_str(" GROUP BY ");
        write_list(out, &s.group_by);
    }
    if let Some(h) = &s.having {
        out.push_str(" HAVING ");
        write_expr(out, h, 0);
    }
}

fn write_table_ref(out: &mut String, t: &TableRef) {
    match t {
        TableRef::Table { name, alias } => {
            ident(out, name);
            if let Some(a) = alias {
                out.push_str(" AS ");
                ident(out, a);
            }
        }
        TableRef::Derived { query, alias } => {
            out.push('(');
            write_query(out, query);
            out.push(')');
            if let Some(a) = alias {
                out.push_str(" AS ");
                ident(out, a);
            }
        }
        TableRef::Join {
            left,
            right,
            kind,
            constraint,
        } => {
            write_table_ref(out, left);
            out.push_str(match kind {
                JoinKind::Comma => ", ",
                JoinKind::Inner => " JOIN ",
                JoinKind::Left => " LEFT JOIN ",
                JoinKind::Right => " RIGHT JOIN ",
                JoinKind::Full => " FULL JOIN ",
                JoinKind::Cross => " CROSS JOIN ",
                JoinKind::Natural => " NATURAL JOIN ",
            });
            if matches!(**right, TableRef::Join { .. }) {
                out.push('(');
                write_table_ref(out, right);
                out.push(')');
            } else {
                write_table_ref(out, right);
            }
            match constraint {
                JoinConstraint::None => {}
                JoinConstraint::On(e) => {
                    out.push_str(" ON ");
                    write_expr(out, e, 0);
                }
                JoinConstraint::Using(cols) => {
                    out.push_str(" USING (");
                    for (i, c) in cols.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        ident(out, c);
                    }
                    out.push(')');
                }
            }
        }
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, 0);
    }
}

// Binding strength, loosest first. Mirrors the parser's descent order.
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_EQUALITY: u8 = 4;
const P_RELATIONAL: u8 = 5;
const P_BITWISE: u8 = 6;
const P_ADDITIVE: u8 = 7;
const P_MULTIPLICATIVE: u8 = 8;
const P_CONCAT: u8 = 9;
const P_UNARY: u8 = 10;
const P_POSTFIX: u8 = 11;
const P_PRIMARY: u8 = 12;

fn binary_prec(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        Or => P_OR,
        And => P_AND,
        Eq | NotEq | Is | IsNot => P_EQUALITY,
        Lt | LtEq | Gt | GtEq => P_RELATIONAL,
        BitAnd | BitOr | ShiftLeft | ShiftRight => P_BITWISE,
        Plus | Minus => P_ADDITIVE,
        Multiply | Divide | Modulo => P_MULTIPLICATIVE,
        Concat => P_CONCAT,
    }
}

fn binary_symbol(op: BinaryOp) -> &'static str {
    use BinaryOp::*;
    match op {
        Or => "OR",
        And => "AND",
        Eq => "=",
        NotEq => "<>",
        Lt => "<",
        LtEq => "<=",
        Gt => ">",
        GtEq => ">=",
        Is => "IS",
        IsNot => "IS NOT",
        Plus => "+",
        Minus => "-",
        Multiply => "*",
        Divide => "/",
        Modulo => "%",
        Concat => "||",
        BitAnd => "&",
        BitOr => "|",
        ShiftLeft => "<<",
        ShiftRight => ">>",
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => binary_prec(*op),
        Expr::Unary { op: UnaryOp::Not, .. } => P_NOT,
        Expr::Unary { .. } => P_UNARY,
        Expr::Pattern { .. }
        | Expr::InList { .. }
        | Expr::InSubquery { .. }
        | Expr::Between { .. }
        | Expr::IsNull { .. } => P_EQUALITY,
        Expr::Collate { .. } => P_POSTFIX,
        _ => P_PRIMARY,
    }
}

/// Writes `e`, parenthesised when it binds looser than `min_prec`.
fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    if expr_prec(e) < min_prec {
        out.push('(');
        write_expr(out, e, 0);
        out.push(')');
        return;
    }
    match e {
        Expr::Column { table, name } => {
            if let Some(t) = table {
                ident(out, t);
                out.push('.');
            }
            ident(out, name);
        }
        Expr::Literal(l) => write_literal(out, l),
        Expr::Unary { op, expr } => match op {
            UnaryOp::Not => {
                out.push_str("NOT ");
                write_expr(out, expr, P_NOT);
            }
            UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot => {
                out.push(match op {
                    UnaryOp::Neg => '-',
                    UnaryOp::Plus => '+',
                    _ => '~',
                });
                let mut inner = String::new();
                write_expr(&mut inner, expr, P_UNARY);
                if inner.starts_with(['-', '+']) {
                    out.push(' ');
                }
                out.push_str(&inner);
            }
        },
        Expr::Binary { op, left, right } => {
            let p = binary_prec(*op);
            write_expr(out, left, p);
            out.push(' ');
            out.push_str(binary_symbol(*op));
            out.push(' ');
            write_expr(out, right, p + 1);
        }
        Expr::Pattern {
            op,
            negated,
            expr,
            pattern,
            escape,
        } => {
            write_expr(out, expr, P_EQUALITY);
            out.push_str(if *negated { " NOT " } else { " " });
            out.push_str(match op {
                PatternOp::Like => "LIKE ",
                PatternOp::Glob => "GLOB ",
                PatternOp::Regexp => "REGEXP ",
                PatternOp::Match => "MATCH ",
            });
            write_expr(out, pattern, P_RELATIONAL);
            if let Some(esc) = escape {
                out.push_str(" ESCAPE ");
                write_expr(out, esc, P_RELATIONAL);
            }
        }
        Expr::InList { expr, list, negated } => {
            write_expr(out, expr, P_EQUALITY);
            out.push_str(if *negated { " NOT IN (" } else { " IN (" });
            write_list(out, list);
            out.push(')');
        }
        Expr::InSubquery { expr, query, negated } => {
            write_expr(out, expr, P_EQUALITY);
            out.push_str(if *negated { " NOT IN (" } else { " IN (" });
            write_query(out, query);
            out.push(')');
        }
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => {
            write_expr(out, expr, P_EQUALITY);
            out.push_str(if *negated { " NOT BETWEEN " } else { " BETWEEN " });
            write_expr(out, low, P_RELATIONAL);
            out.push_str(" AND ");
            write_expr(out, high, P_RELATIONAL);
        }
        Expr::IsNull { expr, negated } => {
            write_expr(out, expr, P_EQUALITY);
            out.push_str(if *negated { " IS NOT NULL" } else { " IS NULL" });
        }
        Expr::Exists { query, negated } => {
            out.push_str(if *negated { "NOT EXISTS (" } else { "EXISTS (" });
            write_query(out, query);
            out.push(')');
        }
        Expr::Subquery(q) => {
            out.push('(');
            write_query(out, q);
            out.push(')');
        }
        Expr::Function { name, args } => {
            ident(out, name);
            out.push('(');
            match args {
                FunctionArgs::Star => out.push('*'),
                FunctionArgs::List { distinct, args } => {
                    if *distinct {
                        out.push_str("DISTINCT ");
                    }
                    write_list(out, args);
                }
            }
            out.push(')');
        }
        Expr::Case {
            operand,
            branches,
            else_result,
        } => {
            out.push_str("CASE");
            if let Some(op) = operand {
                out.push(' ');
                write_expr(out, op, 0);
            }
            for (cond, result) in branches {
                out.push_str(" WHEN ");
                write_expr(out, cond, 0);
                out.push_str(" THEN ");
                write_expr(out, result, 0);
            }
            if let Some(e) = else_result {
                out.push_str(" ELSE ");
                write_expr(out, e, 0);
            }
            out.push_str(" END");
        }
        Expr::Cast { expr, type_name } => {
            out.push_str("CAST(");
            write_expr(out, expr, 0);
            let _ = write!(out, " AS {type_name})");
        }
        Expr::Collate { expr, collation } => {
            write_expr(out, expr, P_POSTFIX);
            out.push_str(" COLLATE ");
            ident(out, collation);
        }
    }
}

fn write_literal(out: &mut String, l: &Literal) {
    match l {
        Literal::Number(n) => out.push_str(n),
        Literal::String(s) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
        Literal::Null => out.push_str("NULL"),
        Literal::True => out.push_str("TRUE"),
        Literal::False => out.push_str("FALSE"),
        Literal::CurrentDate => out.push_str("CURRENT_DATE"),
        Literal::CurrentTime => out.push_str("CURRENT_TIME"),
        Literal::CurrentTimestamp => out.push_str("CURRENT_TIMESTAMP"),
    }
}
