//! Canonical structure keys for SQL queries.
//!
//! A key is produced by parsing, rewriting the tree (table aliases renamed
//! `t1, t2, ...` per query scope; `AND` chains flattened and sorted),
//! rendering it back to SQL and applying text normalization. Two queries
//! are structurally identical exactly when their keys are equal.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sql::ast::*;
use crate::sql::{parse_sql, render_expr, render_query, Dialect, ParseFailure};

/// Canonical rendered form of a query. `digest` is the lowercase hex
/// SHA-256 of the UTF-8 bytes of `key`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StructureKey {
    pub key: String,
    pub digest: String,
}

impl StructureKey {
    pub fn from_key(key: String) -> Self {
        let digest = Sha256::digest(key.as_bytes())
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                use fmt::Write;
                let _ = write!(s, "{b:02x}");
                s
            });
        StructureKey { key, digest }
    }

    pub fn as_str(&self) -> &str {
        &self.key
    }
}

impl fmt::Display for StructureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

/// Outcome of keying one generation: a structure or the failed outcome.
pub type KeyOutcome = Result<StructureKey, ParseFailure>;

/// Parse, canonicalize, render and normalize.
pub fn canonical_key(text: &str, dialect: Dialect) -> KeyOutcome {
    let mut query = parse_sql(text, dialect)?;
    canonicalize_query(&mut query);
    Ok(StructureKey::from_key(normalize_text(&render_query(&query))))
}

/// Tree-level canonicalization, in place.
pub fn canonicalize_query(q: &mut Query) {
    rename_query(q, &mut Vec::new());
    sort_query(q);
}

/// Owned variant of [`canonicalize_query`].
pub fn canonicalize_ast(mut q: Query) -> Query {
    canonicalize_query(&mut q);
    q
}

/// Pulls the SQL out of a raw model response: strips a surrounding code
/// fence and a leading `SQL:` label.
pub fn extract_sql(raw: &str) -> String {
    let mut s = strip_code_fence(raw).trim();
    if s.len() >= 4 && s[..4].eq_ignore_ascii_case("sql:") {
        s = s[4..].trim_start();
    }
    s.to_string()
}

/// Returns the body of the first fenced block, or the input when there is
/// no fence.
pub fn strip_code_fence(raw: &str) -> &str {
    let Some(open) = raw.find("```") else {
        return raw;
    };
    let after = &raw[open + 3..];
    // skip the info string (```sql, ```json)
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let info = &after[..body_start];
    let body = if info.trim().chars().all(|c| c.is_ascii_alphanumeric()) {
        &after[body_start..]
    } else {
        after
    };
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

// ---------------------------------------------------------------------------
// Text normalization

/// Text rules applied to rendered SQL, in order: trim and drop trailing
/// semicolons; turn line breaks into spaces and collapse whitespace runs;
/// drop `AS name` after a bare column in a select list; lowercase.
pub fn normalize_text(sql: &str) -> String {
    let mut s = sql.trim();
    while let Some(rest) = s.strip_suffix(';') {
        s = rest.trim_end();
    }
    let collapsed = collapse_whitespace(s);
    remove_column_aliases(&collapsed).to_lowercase()
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for c in s.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Word,
    Quoted,
    Str,
    Space,
    Punct(char),
}

fn scan_pieces(s: &str) -> Vec<(Piece, usize, usize)> {
    let bytes: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let byte_at = |i: usize| bytes.get(i).map_or(s.len(), |b| b.0);
    while i < bytes.len() {
        let (start, c) = bytes[i];
        let (piece, next) = if c == ' ' {
            (Piece::Space, i + 1)
        } else if c.is_alphanumeric() || c == '_' || c == '$' {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].1.is_alphanumeric() || bytes[j].1 == '_' || bytes[j].1 == '$') {
                j += 1;
            }
            (Piece::Word, j)
        } else if matches!(c, '\'' | '"' | '`' | '[') {
            let close = if c == '[' { ']' } else { c };
            let mut j = i + 1;
            loop {
                match bytes.get(j) {
                    None => break,
                    Some(&(_, d)) if d == close => {
                        if close != ']' && bytes.get(j + 1).map(|b| b.1) == Some(close) {
                            j += 2;
                            continue;
                        }
                        j += 1;
                        break;
                    }
                    _ => j += 1,
                }
            }
            (if c == '\'' { Piece::Str } else { Piece::Quoted }, j)
        } else {
            (Piece::Punct(c), i + 1)
        };
        out.push((piece, start, byte_at(next)));
        i = next;
    }
    out
}

fn remove_column_aliases(s: &str) -> String {
    let all = scan_pieces(s);
    let toks: Vec<(Piece, usize, usize)> = all.iter().copied().filter(|p| p.0 != Piece::Space).collect();
    let text = |t: &(Piece, usize, usize)| &s[t.1..t.2];
    let is_kw = |t: &(Piece, usize, usize), kw: &str| t.0 == Piece::Word && text(t).eq_ignore_ascii_case(kw);
    let is_name = |t: &(Piece, usize, usize)| {
        matches!(t.0, Piece::Quoted) || (t.0 == Piece::Word && !crate::sql::is_reserved(text(t)))
    };

    // byte ranges to drop: from the space before AS to the end of the alias
    let mut drops: Vec<(usize, usize)> = Vec::new();
    // one flag per paren depth: are we inside a select list?
    let mut in_select = vec![false];
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        match t.0 {
            Piece::Punct('(') => in_select.push(false),
            Piece::Punct(')') => {
                if in_select.len() > 1 {
                    in_select.pop();
                }
            }
            Piece::Word if is_kw(t, "select") => *in_select.last_mut().unwrap() = true,
            Piece::Word if is_kw(t, "from") => *in_select.last_mut().unwrap() = false,
            _ => {}
        }
        if *in_select.last().unwrap() && is_kw(t, "as") && i >= 2 {
            // column ref is `name` or `name . name`, preceded by a list boundary
            let col_start = if i >= 4 && toks[i - 2].0 == Piece::Punct('.') && is_name(&toks[i - 3]) {
                i - 3
            } else {
                i - 1
            };
            let col_ok = is_name(&toks[i - 1]);
            let before = col_start.checked_sub(1).map(|j| &toks[j]);
            let boundary = before.is_some_and(|b| {
                b.0 == Piece::Punct(',') || is_kw(b, "select") || is_kw(b, "distinct") || is_kw(b, "all")
            });
            let alias = toks.get(i + 1);
            let after = toks.get(i + 2);
            let alias_ok = alias.is_some_and(|a| is_name(a) || a.0 == Piece::Str);
            let end_ok = after.is_none_or(|a| {
                a.0 == Piece::Punct(',')
                    || a.0 == Piece::Punct(')')
                    || ["from", "where", "group", "having", "order", "limit", "union", "intersect", "except"]
                        .iter()
                        .any(|k| is_kw(a, k))
            });
            if col_ok && boundary && alias_ok && end_ok {
                let alias = alias.unwrap();
                let prev_end = toks[i - 1].2;
                drops.push((prev_end, alias.2));
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    if drops.is_empty() {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut last = 0;
    for (a, b) in drops {
        out.push_str(&s[last..a]);
        last = b;
    }
    out.push_str(&s[last..]);
    out
}

// ---------------------------------------------------------------------------
// Alias renaming

/// One query scope: original alias (lowercased) to canonical name.
type Scope = HashMap<String, String>;

fn lookup<'a>(scopes: &'a [Scope], qualifier: &str) -> Option<&'a String> {
    let key = qualifier.to_lowercase();
    scopes.iter().rev().find_map(|s| s.get(&key))
}

fn rename_query(q: &mut Query, outer: &mut Vec<Scope>) {
    match &mut q.body {
        SetExpr::Select(sel) => {
            let scope = rename_select(sel, outer);
            outer.push(scope);
            for item in &mut q.order_by {
                rename_expr(&mut item.expr, outer);
            }
            if let Some(l) = &mut q.limit {
                rename_expr(&mut l.count, outer);
                if let Some(o) = &mut l.offset {
                    rename_expr(o, outer);
                }
            }
            outer.pop();
        }
        SetExpr::Compound { .. } => {
            rename_set_expr(&mut q.body, outer);
            for item in &mut q.order_by {
                rename_expr(&mut item.expr, outer);
            }
            if let Some(l) = &mut q.limit {
                rename_expr(&mut l.count, outer);
                if let Some(o) = &mut l.offset {
                    rename_expr(o, outer);
                }
            }
        }
    }
}

fn rename_set_expr(s: &mut SetExpr, outer: &mut Vec<Scope>) {
    match s {
        SetExpr::Select(sel) => {
            rename_select(sel, outer);
        }
        SetExpr::Compound { left, right, .. } => {
            rename_set_expr(left, outer);
            rename_set_expr(right, outer);
        }
    }
}

/// Renames the select's own aliases and rewrites references; returns the
/// scope so a trailing ORDER BY can resolve against it.
fn rename_select(sel: &mut Select, outer: &mut Vec<Scope>) -> Scope {
    let mut scope = Scope::new();
    if let Some(from) = &mut sel.from {
        let mut counter = 0;
        assign_aliases(from, &mut scope, &mut counter, outer);
    }
    outer.push(scope);
    for item in &mut sel.projection {
        match item {
            SelectItem::Wildcard => {}
            SelectItem::QualifiedWildcard(t) => {
                if let Some(new) = lookup(outer, &t.value) {
                    *t = Ident::new(new.clone());
                }
            }
            SelectItem::Expr { expr, .. } => rename_expr(expr, outer),
        }
    }
    if let Some(from) = &mut sel.from {
        rename_join_conditions(from, outer);
    }
    if let Some(w) = &mut sel.selection {
        rename_expr(w, outer);
    }
    for g in &mut sel.group_by {
        rename_expr(g, outer);
    }
    if let Some(h) = &mut sel.having {
        rename_expr(h, outer);
    }
    outer.pop().unwrap()
}

/// Walks FROM items left to right, numbering aliased items in order.
fn assign_aliases(t: &mut TableRef, scope: &mut Scope, counter: &mut usize, outer: &mut Vec<Scope>) {
    match t {
        TableRef::Table { alias, .. } => {
            if let Some(a) = alias {
                *counter += 1;
                let new = format!("t{counter}");
                scope.entry(a.value.to_lowercase()).or_insert_with(|| new.clone());
                *a = Ident::new(new);
            }
        }
        TableRef::Derived { query, alias } => {
            // derived tables cannot see sibling FROM items
            rename_query(query, outer);
            if let Some(a) = alias {
                *counter += 1;
                let new = format!("t{counter}");
                scope.entry(a.value.to_lowercase()).or_insert_with(|| new.clone());
                *a = Ident::new(new);
            }
        }
        TableRef::Join { left, right, .. } => {
            assign_aliases(left, scope, counter, outer);
            assign_aliases(right, scope, counter, outer);
        }
    }
}

fn rename_join_conditions(t: &mut TableRef, scopes: &mut Vec<Scope>) {
    if let TableRef::Join {
        left,
        right,
        constraint,
        ..
    } = t
    {
        rename_join_conditions(left, scopes);
        rename_join_conditions(right, scopes);
        if let JoinConstraint::On(e) = constraint {
            rename_expr(e, scopes);
        }
    }
}

fn rename_expr(e: &mut Expr, scopes: &mut Vec<Scope>) {
    match e {
        Expr::Column { table: Some(t), .. } => {
            if let Some(new) = lookup(scopes, &t.value) {
                *t = Ident::new(new.clone());
            }
        }
        Expr::Subquery(q) => rename_query(q, scopes),
        Expr::Exists { query, .. } => rename_query(query, scopes),
        Expr::InSubquery { expr, query, .. } => {
            rename_expr(expr, scopes);
            rename_query(query, scopes);
        }
        _ => for_each_child_expr(e, &mut |c| rename_expr(c, scopes)),
    }
}

/// Visits direct child expressions; nested queries are not entered.
fn for_each_child_expr(e: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    match e {
        Expr::Column { .. } | Expr::Literal(_) | Expr::Subquery(_) | Expr::Exists { .. } => {}
        Expr::Unary { expr, .. } | Expr::IsNull { expr, .. } | Expr::Cast { expr, .. } | Expr::Collate { expr, .. } => {
            f(expr)
        }
        Expr::InSubquery { expr, .. } => f(expr),
        Expr::Binary { left, right, .. } => {
            f(left);
            f(right);
        }
        Expr::Pattern {
            expr, pattern, escape, ..
        } => {
            f(expr);
            f(pattern);
            if let Some(e) = escape {
                f(e);
            }
        }
        Expr::InList { expr, list, .. } => {
            f(expr);
            list.iter_mut().for_each(&mut *f);
        }
        Expr::Between { expr, low, high, .. } => {
            f(expr);
            f(low);
            f(high);
        }
        Expr::Function { args, .. } => {
            if let FunctionArgs::List { args, .. } = args {
                args.iter_mut().for_each(&mut *f);
            }
        }
        Expr::Case {
            operand,
            branches,
            else_result,
        } => {
            if let Some(o) = operand {
                f(o);
            }
            for (c, r) in branches {
                f(c);
                f(r);
            }
            if let Some(x) = else_result {
                f(x);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conjunct sorting

fn sort_query(q: &mut Query) {
    sort_set_expr(&mut q.body);
    for item in &mut q.order_by {
        sort_expr(&mut item.expr);
    }
    if let Some(l) = &mut q.limit {
        sort_expr(&mut l.count);
        if let Some(o) = &mut l.offset {
            sort_expr(o);
        }
    }
}

fn sort_set_expr(s: &mut SetExpr) {
    match s {
        SetExpr::Select(sel) => {
            for item in &mut sel.projection {
                if let SelectItem::Expr { expr, .. } = item {
                    sort_expr(expr);
                }
            }
            if let Some(from) = &mut sel.from {
                sort_table_ref(from);
            }
            if let Some(w) = &mut sel.selection {
                sort_expr(w);
            }
            sel.group_by.iter_mut().for_each(sort_expr);
            if let Some(h) = &mut sel.having {
                sort_expr(h);
            }
        }
        SetExpr::Compound { left, right, .. } => {
            sort_set_expr(left);
            sort_set_expr(right);
        }
    }
}

fn sort_table_ref(t: &mut TableRef) {
    match t {
        TableRef::Table { .. } => {}
        TableRef::Derived { query, .. } => sort_query(query),
        TableRef::Join {
            left,
            right,
            constraint,
            ..
        } => {
            sort_table_ref(left);
            sort_table_ref(right);
            if let JoinConstraint::On(e) = constraint {
                sort_expr(e);
            }
        }
    }
}

fn flatten_and(e: Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary {
            op: BinaryOp::And,
            left,
            right,
        } => {
            flatten_and(*left, out);
            flatten_and(*right, out);
        }
        other => out.push(other),
    }
}

/// Bottom-up: children first, then any AND chain rooted here is flattened,
/// ordered by rendered text and rebuilt left-deep.
fn sort_expr(e: &mut Expr) {
    match e {
        Expr::Subquery(q) | Expr::Exists { query: q, .. } => sort_query(q),
        Expr::InSubquery { expr, query, .. } => {
            sort_expr(expr);
            sort_query(query);
        }
        _ => for_each_child_expr(e, &mut |c| sort_expr(c)),
    }
    if !matches!(e, Expr::Binary { op: BinaryOp::And, .. }) {
        return;
    }
    let owned = std::mem::replace(e, Expr::Literal(Literal::Null));
    let mut conjuncts = Vec::new();
    flatten_and(owned, &mut conjuncts);
    let mut keyed: Vec<(String, String, Expr)> = conjuncts
        .into_iter()
        .map(|c| {
            let text = render_expr(&c);
            (text.to_lowercase(), text, c)
        })
        .collect();
    // bytewise on the lowercased text, then on the original text
    keyed.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()).then_with(|| a.1.as_bytes().cmp(b.1.as_bytes())));
    let mut it = keyed.into_iter().map(|k| k.2);
    let first = it.next().expect("AND has two operands");
    *e = it.fold(first, |acc, c| Expr::binary(BinaryOp::And, acc, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> String {
        canonical_key(s, Dialect::Sqlite).unwrap_or_else(|e| panic!("{s}: {e}")).key
    }

    #[test]
    fn normalize_text_rules() {
        assert_eq!(normalize_text("SELECT Name AS n FROM stadium;"), "select name from stadium");
        assert_eq!(normalize_text("select a from t"), "select a from t");
        assert_eq!(normalize_text("SELECT  a\nFROM t ;"), "select a from t");
        assert_eq!(normalize_text("  SELECT a FROM t;;  "), "select a from t");
        assert_eq!(normalize_text("SELECT x\r\n\tFROM t"), "select x from t");
    }

    #[test]
    fn alias_removal_scope() {
        // qualified column
        assert_eq!(normalize_text("SELECT t1.Name AS n, b FROM t AS t1"), "select t1.name, b from t as t1");
        // expressions keep their alias
        assert_eq!(normalize_text("SELECT COUNT(*) AS c FROM t"), "select count(*) as c from t");
        assert_eq!(normalize_text("SELECT a + 1 AS c FROM t"), "select a + 1 as c from t");
        // table aliases, including comma joins, are untouched
        assert_eq!(normalize_text("SELECT a FROM t AS x, u AS y"), "select a from t as x, u as y");
        // CAST's AS is not an alias
        assert_eq!(normalize_text("SELECT CAST(a AS REAL) FROM t"), "select cast(a as real) from t");
        // subquery select lists
        assert_eq!(
            normalize_text("SELECT * FROM (SELECT a AS b FROM t) AS s"),
            "select * from (select a from t) as s"
        );
        // literal text is not scanned
        assert_eq!(normalize_text("SELECT 'a AS b' FROM t"), "select 'a as b' from t");
    }

    #[test]
    fn aliases_renamed_in_order() {
        assert_eq!(
            key("SELECT x.name FROM a AS x JOIN b AS y ON x.id = y.id"),
            "select t1.name from a as t1 join b as t2 on t1.id = t2.id"
        );
        assert_eq!(
            key("SELECT p.name FROM a p JOIN b q ON p.id = q.id"),
            key("SELECT x.name FROM a AS x JOIN b AS y ON x.id = y.id")
        );
    }

    #[test]
    fn subquery_scope_restarts() {
        assert_eq!(
            key("SELECT o.a FROM t AS o WHERE o.b IN (SELECT i.b FROM u AS i WHERE i.c = 1)"),
            "select t1.a from t as t1 where t1.b in (select t1.b from u as t1 where t1.c = 1)"
        );
        // correlated reference to the outer alias picks up the outer name
        assert_eq!(
            key("SELECT o.a FROM t AS o, v AS w WHERE EXISTS (SELECT 1 FROM u AS i WHERE i.c = w.c)"),
            "select t1.a from t as t1, v as t2 where exists (select 1 from u as t1 where t1.c = t2.c)"
        );
    }

    #[test]
    fn conjuncts_sorted() {
        assert_eq!(key("SELECT a FROM t WHERE b = 1 AND a = 2"), key("SELECT a FROM t WHERE a = 2 AND b = 1"));
        assert_eq!(key("SELECT a FROM t WHERE b = 1 AND a = 2"), "select a from t where a = 2 and b = 1");
        assert_eq!(
            key("SELECT a FROM t WHERE (c = 1 AND b = 2) AND a = 3"),
            key("SELECT a FROM t WHERE a = 3 AND (b = 2 AND c = 1)")
        );
        // OR is left alone
        assert_ne!(key("SELECT a FROM t WHERE b = 1 OR a = 2"), key("SELECT a FROM t WHERE a = 2 OR b = 1"));
    }

    #[test]
    fn unchanged_when_no_rule_fires() {
        let q = parse_sql("SELECT a, b FROM t WHERE a > 1 ORDER BY b", Dialect::Sqlite).unwrap();
        assert_eq!(canonicalize_ast(q.clone()), q);
    }

    #[test]
    fn appendix_examples_distinguished() {
        let gold = "SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id \
                    ORDER BY T2.Horsepower ASC LIMIT 1;";
        let variant = "SELECT DISTINCT cn.Model FROM cars_data cd JOIN car_names cn ON cd.Id = cn.MakeId \
                       WHERE cd.Horsepower = (SELECT MIN(Horsepower) FROM cars_data);";
        assert_ne!(key(gold), key(variant));
        assert_ne!(
            key("SELECT Country, COUNT(*) FROM singer GROUP BY Country"),
            key("SELECT Country, COUNT(Singer_ID) FROM singer GROUP BY Country")
        );
    }

    #[test]
    fn idempotent_on_keys() {
        for q in [
            "SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.Horsepower ASC LIMIT 1",
            "SELECT Name AS n FROM stadium WHERE Capacity > 100 AND Average < 5",
            "SELECT \"First Name\" FROM people WHERE note = 'A  B'",
        ] {
            let k = canonical_key(q, Dialect::Sqlite).unwrap();
            assert_eq!(canonical_key(&k.key, Dialect::Sqlite).unwrap(), k);
        }
    }

    #[test]
    fn digest_is_sha256_hex() {
        let k = StructureKey::from_key("abc".into());
        assert_eq!(k.digest, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn key_serializes_as_key_and_digest() {
        let k = StructureKey::from_key("select 1".into());
        let v = serde_json::to_value(&k).unwrap();
        assert_eq!(v["key"], "select 1");
        assert_eq!(v["digest"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn extract_from_fenced_output() {
        assert_eq!(extract_sql("```sql\nSELECT 1;\n```"), "SELECT 1;");
        assert_eq!(extract_sql("Here:\n```\nSELECT a FROM t\n```\nDone"), "SELECT a FROM t");
        assert_eq!(extract_sql("SQL: SELECT 1"), "SELECT 1");
        assert_eq!(extract_sql("  SELECT 1  "), "SELECT 1");
    }
}
