use super::*;
use crate::sql::quote_ident;

/// Lowers a validated IR to SQL. Clause order is fixed:
/// `SELECT [DISTINCT] .. FROM .. [JOIN .. ON ..]* [WHERE ..] [GROUP BY ..]
/// [HAVING ..] [ORDER BY ..] [LIMIT n]`.
pub fn compile_ir(ir: &QueryIr) -> Result<String, IrError> {
    let mut out = String::new();
    query(ir, &mut out)?;
    Ok(out)
}

fn fail(msg: &str) -> IrError {
    IrError::Compile(msg.to_string())
}

fn query(ir: &QueryIr, out: &mut String) -> Result<(), IrError> {
    if ir.select.is_empty() {
        return Err(fail("empty select list"));
    }
    out.push_str("SELECT ");
    if ir.distinct {
        out.push_str("DISTINCT ");
    }
    for (i, item) in ir.select.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match &item.expr {
            IrExpr::Star => out.push('*'),
            IrExpr::TableStar(t) => {
                out.push_str(&quote_ident(t));
                out.push_str(".*");
            }
            e => expr(e, out)?,
        }
        if let Some(a) = &item.alias {
            if matches!(item.expr, IrExpr::Star | IrExpr::TableStar(_)) {
                return Err(fail("alias on a star item"));
            }
            out.push_str(" AS ");
            out.push_str(&quote_ident(a));
        }
    }
    out.push_str(" FROM ");
    source(&ir.from, out)?;
    for j in &ir.joins {
        out.push_str(match j.kind {
            JoinType::Inner => " JOIN ",
            JoinType::Left => " LEFT JOIN ",
        });
        source(&j.source, out)?;
        if !j.on.is_empty() {
            out.push_str(" ON ");
            conditions(&j.on, out)?;
        }
    }
    if !ir.where_.is_empty() {
        out.push_str(" WHERE ");
        conditions(&ir.where_, out)?;
    }
    if !ir.group_by.is_empty() {
        out.push_str(" GROUP BY ");
        for (i, e) in ir.group_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            expr(e, out)?;
        }
    }
    if !ir.having.is_empty() {
        out.push_str(" HAVING ");
        conditions(&ir.having, out)?;
    }
    if !ir.order_by.is_empty() {
        out.push_str(" ORDER BY ");
        for (i, o) in ir.order_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            expr(&o.expr, out)?;
            out.push_str(match o.direction {
                Direction::Asc => " ASC",
                Direction::Desc => " DESC",
            });
        }
    }
    if let Some(n) = ir.limit {
        out.push_str(&format!(" LIMIT {n}"));
    }
    Ok(())
}

fn source(s: &Source, out: &mut String) -> Result<(), IrError> {
    let alias = match s {
        Source::Table { table, alias } => {
            out.push_str(&quote_ident(table));
            alias
        }
        Source::Subquery { query: q, alias } => {
            out.push('(');
            query(q, out)?;
            out.push(')');
            alias
        }
    };
    if let Some(a) = alias {
        out.push_str(" AS ");
        out.push_str(&quote_ident(a));
    }
    Ok(())
}

/// A condition list joined with AND in list order.
fn conditions(list: &[IrExpr], out: &mut String) -> Result<(), IrError> {
    for (i, c) in list.iter().enumerate() {
        if i > 0 {
            out.push_str(" AND ");
        }
        if list.len() > 1 && matches!(c, IrExpr::Or(_)) {
            wrapped(c, out)?;
        } else {
            expr(c, out)?;
        }
    }
    Ok(())
}

fn wrapped(e: &IrExpr, out: &mut String) -> Result<(), IrError> {
    out.push('(');
    expr(e, out)?;
    out.push(')');
    Ok(())
}

/// Operands that are themselves operators get parentheses.
fn operand(e: &IrExpr, out: &mut String) -> Result<(), IrError> {
    match e {
        IrExpr::Binary { .. } | IrExpr::Or(_) | IrExpr::And(_) | IrExpr::Not(_) => wrapped(e, out),
        _ => expr(e, out),
    }
}

fn expr(e: &IrExpr, out: &mut String) -> Result<(), IrError> {
    match e {
        IrExpr::Column { table, column } => {
            out.push_str(&quote_ident(table));
            out.push('.');
            out.push_str(&quote_ident(column));
        }
        IrExpr::Star | IrExpr::TableStar(_) => return Err(fail("star outside a select list or COUNT(*)")),
        IrExpr::Literal(l) => literal(l, out),
        IrExpr::Function { name, args, distinct } => {
            out.push_str(&name.to_ascii_uppercase());
            out.push('(');
            if *distinct {
                out.push_str("DISTINCT ");
            }
            match args.as_slice() {
                [IrExpr::Star] => out.push('*'),
                _ => {
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        expr(a, out)?;
                    }
                }
            }
            out.push(')');
        }
        IrExpr::Binary { op, left, right } => {
            operand(left, out)?;
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            if op.takes_set() {
                match right.as_ref() {
                    IrExpr::List(items) => {
                        if items.is_empty() {
                            return Err(fail("empty IN list"));
                        }
                        out.push('(');
                        for (i, a) in items.iter().enumerate() {
                            if i > 0 {
                                out.push_str(", ");
                            }
                            expr(a, out)?;
                        }
                        out.push(')');
                    }
                    IrExpr::Subquery(_) => expr(right, out)?,
                    _ => return Err(fail("IN needs a list or subquery")),
                }
            } else {
                operand(right, out)?;
            }
        }
        IrExpr::List(_) => return Err(fail("list outside IN")),
        IrExpr::Or(items) | IrExpr::And(items) => {
            let sep = if matches!(e, IrExpr::Or(_)) { " OR " } else { " AND " };
            if items.is_empty() {
                return Err(fail("empty boolean group"));
            }
            for (i, a) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                if matches!(a, IrExpr::Or(_) | IrExpr::And(_)) {
                    wrapped(a, out)?;
                } else {
                    expr(a, out)?;
                }
            }
        }
        IrExpr::Not(inner) => {
            out.push_str("NOT ");
            operand(inner, out)?;
        }
        IrExpr::Subquery(q) => {
            out.push('(');
            query(q, out)?;
            out.push(')');
        }
    }
    Ok(())
}

fn literal(l: &IrLiteral, out: &mut String) {
    match l {
        IrLiteral::Null => out.push_str("NULL"),
        IrLiteral::Bool(true) => out.push_str("TRUE"),
        IrLiteral::Bool(false) => out.push_str("FALSE"),
        IrLiteral::Number(n) => out.push_str(n),
        IrLiteral::String(s) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
    }
}
