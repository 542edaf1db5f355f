use std::cmp::Ordering;

use sqlshape_core::sql::lexer::{tokenize, Tok};

use crate::engine::{ResultTable, Value};

/// Absolute tolerance for comparing reals.
pub const REAL_TOLERANCE: f64 = 1e-6;

fn numeric(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        _ => None,
    }
}

/// Integers, text, blobs and nulls compare exactly; a real against a real
/// or an integer compares within [`REAL_TOLERANCE`].
pub fn cells_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Integer(x), Value::Integer(y)) => x == y,
        (Value::Text(x), Value::Text(y)) => x == y,
        (Value::Blob(x), Value::Blob(y)) => x == y,
        (Value::Real(_), Value::Real(_) | Value::Integer(_)) | (Value::Integer(_), Value::Real(_)) => {
            let (x, y) = (numeric(a).unwrap(), numeric(b).unwrap());
            x == y || (x - y).abs() <= REAL_TOLERANCE
        }
        _ => false,
    }
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Null => 0,
        Value::Integer(_) | Value::Real(_) => 1,
        Value::Text(_) => 2,
        Value::Blob(_) => 3,
    }
}

/// Total order used to line rows up before an unordered comparison.
fn cell_order(a: &Value, b: &Value) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Blob(x), Value::Blob(y)) => x.cmp(y),
        _ => match (numeric(a), numeric(b)) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => Ordering::Equal,
        },
    })
}

fn row_order(a: &[Value], b: &[Value]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| cell_order(x, y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn rows_equal(a: &[Value], b: &[Value]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| cells_equal(x, y))
}

/// Row-sequence equality when `ordered`, multiset equality otherwise.
/// Column counts must agree.
pub fn results_equivalent(pred: &ResultTable, gold: &ResultTable, ordered: bool) -> bool {
    if pred.columns != gold.columns || pred.rows.len() != gold.rows.len() {
        return false;
    }
    if ordered {
        return pred.rows.iter().zip(&gold.rows).all(|(a, b)| rows_equal(a, b));
    }
    let mut p: Vec<&Vec<Value>> = pred.rows.iter().collect();
    let mut g: Vec<&Vec<Value>> = gold.rows.iter().collect();
    p.sort_by(|a, b| row_order(a, b));
    g.sort_by(|a, b| row_order(a, b));
    p.iter().zip(&g).all(|(a, b)| rows_equal(a, b))
}

/// Whether the outermost statement ends with ORDER BY, i.e. ORDER BY appears
/// outside any parentheses.
pub fn has_outer_order_by(sql: &str) -> bool {
    let Ok(tokens) = tokenize(sql) else {
        return false;
    };
    let mut depth = 0i32;
    let mut prev_order = false;
    for t in &tokens {
        match &t.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Word(w) if depth == 0 => {
                if prev_order && w.eq_ignore_ascii_case("by") {
                    return true;
                }
                prev_order = w.eq_ignore_ascii_case("order");
                continue;
            }
            _ => {}
        }
        prev_order = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[Value]]) -> ResultTable {
        ResultTable {
            columns: rows.first().map_or(1, |r| r.len()),
            rows: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn equivalence_examples() {
        let a = table(&[&[Value::Integer(1), Value::Text("x".into())], &[Value::Integer(2), Value::Null]]);
        let b = table(&[&[Value::Integer(2), Value::Null], &[Value::Integer(1), Value::Text("x".into())]]);
        assert!(results_equivalent(&a, &a, true));
        assert!(results_equivalent(&a, &b, false));
        assert!(!results_equivalent(&a, &b, true));
    }

    #[test]
    fn reals_and_multiplicity() {
        let a = table(&[&[Value::Real(0.1 + 0.2)]]);
        let b = table(&[&[Value::Real(0.3)]]);
        assert!(results_equivalent(&a, &b, true));
        assert!(results_equivalent(&table(&[&[Value::Integer(3)]]), &table(&[&[Value::Real(3.0000001)]]), true));
        assert!(!results_equivalent(&table(&[&[Value::Real(1.0)]]), &table(&[&[Value::Real(1.00001)]]), true));
        assert!(!results_equivalent(&table(&[&[Value::Integer(1)]]), &table(&[&[Value::Text("1".into())]]), true));
        let twice = table(&[&[Value::Integer(1)], &[Value::Integer(1)], &[Value::Integer(2)]]);
        let once = table(&[&[Value::Integer(1)], &[Value::Integer(2)], &[Value::Integer(2)]]);
        assert!(!results_equivalent(&twice, &once, false));
    }

    #[test]
    fn column_count_matters() {
        let a = ResultTable { columns: 1, rows: vec![] };
        let b = ResultTable { columns: 2, rows: vec![] };
        assert!(!results_equivalent(&a, &b, false));
    }

    #[test]
    fn outer_order_by() {
        assert!(has_outer_order_by("SELECT a FROM t ORDER BY a"));
        assert!(has_outer_order_by("select a from t order  by a desc limit 1"));
        assert!(!has_outer_order_by("SELECT a FROM (SELECT a FROM t ORDER BY a)"));
        assert!(!has_outer_order_by("SELECT a FROM t WHERE a IN (SELECT a FROM t ORDER BY a LIMIT 3)"));
        assert!(!has_outer_order_by("SELECT \"order\", by FROM t"));
    }
}
