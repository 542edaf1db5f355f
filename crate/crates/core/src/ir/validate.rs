use serde_json::{Map, Value};

use super::*;
use crate::canon::strip_code_fence;

/// Function names accepted in `{"func": ...}` nodes (case-insensitive).
pub const FUNCTIONS: &[&str] = &[
    "COUNT", "SUM", "AVG", "MIN", "MAX", "TOTAL", "GROUP_CONCAT", "ABS", "LENGTH", "LOWER", "UPPER",
    "ROUND", "SUBSTR", "SUBSTRING", "TRIM", "LTRIM", "RTRIM", "REPLACE", "INSTR", "COALESCE", "IFNULL",
    "NULLIF", "IIF", "DATE", "TIME", "DATETIME", "JULIANDAY", "STRFTIME", "TYPEOF", "HEX", "PRINTF",
    "CHAR", "UNICODE", "RANDOM",
];

const QUERY_FIELDS: &[&str] = &[
    "select", "from", "joins", "where", "group_by", "having", "order_by", "limit", "distinct",
];

/// Parses model output (optionally fenced) into a checked IR.
pub fn validate_ir(raw: &str) -> Result<QueryIr, IrError> {
    let body = strip_code_fence(raw).trim();
    let value: Value = serde_json::from_str(body).map_err(|e| IrError::Json(e.to_string()))?;
    validate_value(&value)
}

pub fn validate_value(value: &Value) -> Result<QueryIr, IrError> {
    query_node(value, "")
}

fn err(path: &str, message: impl Into<String>) -> IrError {
    IrError::Schema {
        path: if path.is_empty() { "/".into() } else { path.to_string() },
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IrError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

/// `{"type": "query", "query": {...}}`, optionally with `"version"`.
fn query_node(v: &Value, path: &str) -> Result<QueryIr, IrError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "type" | "query" | "version") {
            return Err(err(&format!("{path}/{key}"), "unknown field"));
        }
    }
    match obj.get("type") {
        Some(Value::String(t)) if t == "query" => {}
        Some(_) => return Err(err(&format!("{path}/type"), "must be \"query\"")),
        None => return Err(err(&format!("{path}/type"), "missing required field")),
    }
    if let Some(ver) = obj.get("version") {
        if ver.as_u64() != Some(IR_VERSION as u64) {
            return Err(err(&format!("{path}/version"), format!("unsupported version, expected {IR_VERSION}")));
        }
    }
    let qpath = format!("{path}/query");
    let q = obj.get("query").ok_or_else(|| err(&qpath, "missing required field"))?;
    query_body(q, &qpath)
}

fn query_body(v: &Value, path: &str) -> Result<QueryIr, IrError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if !QUERY_FIELDS.contains(&key.as_str()) {
            return Err(err(&format!("{path}/{key}"), "unknown field"));
        }
    }

    let sel_path = format!("{path}/select");
    let select_items = obj
        .get("select")
        .ok_or_else(|| err(&sel_path, "missing required field"))?
        .as_array()
        .ok_or_else(|| err(&sel_path, "expected an array"))?;
    if select_items.is_empty() {
        return Err(err(&sel_path, "must not be empty"));
    }
    let select = select_items
        .iter()
        .enumerate()
        .map(|(i, item)| select_item(item, &format!("{sel_path}/{i}")))
        .collect::<Result<Vec<_>, _>>()?;

    let from_path = format!("{path}/from");
    let from = source(obj.get("from").ok_or_else(|| err(&from_path, "missing required field"))?, &from_path)?;

    let joins = optional_list(obj, "joins", path)?
        .iter()
        .enumerate()
        .map(|(i, j)| join(j, &format!("{path}/joins/{i}")))
        .collect::<Result<Vec<_>, _>>()?;

    let where_ = condition_list(obj, "where", path)?;
    let group_by = optional_list(obj, "group_by", path)?
        .iter()
        .enumerate()
        .map(|(i, e)| expr(e, &format!("{path}/group_by/{i}"), Ctx::Value))
        .collect::<Result<Vec<_>, _>>()?;
    let having = condition_list(obj, "having", path)?;

    let order_by = optional_list(obj, "order_by", path)?
        .iter()
        .enumerate()
        .map(|(i, o)| order_item(o, &format!("{path}/order_by/{i}")))
        .collect::<Result<Vec<_>, _>>()?;

    let limit = match obj.get("limit") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| err(&format!("{path}/limit"), "must be a non-negative integer or null"))?,
        ),
    };
    let distinct = match obj.get("distinct") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(err(&format!("{path}/distinct"), "must be a boolean")),
    };
    Ok(QueryIr {
        select,
        from,
        joins,
        where_,
        group_by,
        having,
        order_by,
        limit,
        distinct,
    })
}

fn optional_list<'a>(obj: &'a Map<String, Value>, field: &str, path: &str) -> Result<&'a [Value], IrError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(&[]),
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(err(&format!("{path}/{field}"), "expected an array")),
    }
}

fn condition_list(obj: &Map<String, Value>, field: &str, path: &str) -> Result<Vec<IrExpr>, IrError> {
    optional_list(obj, field, path)?
        .iter()
        .enumerate()
        .map(|(i, c)| expr(c, &format!("{path}/{field}/{i}"), Ctx::Value))
        .collect()
}

fn optional_alias(obj: &Map<String, Value>, path: &str) -> Result<Option<String>, IrError> {
    match obj.get("alias") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if !s.is_empty() => Ok(Some(s.clone())),
        Some(_) => Err(err(&format!("{path}/alias"), "must be a non-empty string or null")),
    }
}

fn select_item(v: &Value, path: &str) -> Result<SelectItem, IrError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "expr" | "alias") {
            return Err(err(&format!("{path}/{key}"), "unknown field"));
        }
    }
    let epath = format!("{path}/expr");
    let e = obj.get("expr").ok_or_else(|| err(&epath, "missing required field"))?;
    let expr = expr(e, &epath, Ctx::SelectItem)?;
    let alias = optional_alias(obj, path)?;
    if alias.is_some() && matches!(expr, IrExpr::Star | IrExpr::TableStar(_)) {
        return Err(err(&format!("{path}/alias"), "a star item cannot have an alias"));
    }
    Ok(SelectItem { expr, alias })
}

/// `{"table": name, "alias": ...}` or `{"subquery": {"type": "query", ...}, "alias": ...}`.
fn source(v: &Value, path: &str) -> Result<Source, IrError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "table" | "subquery" | "alias") {
            return Err(err(&format!("{path}/{key}"), "unknown field"));
        }
    }
    let alias = optional_alias(obj, path)?;
    match (obj.get("table"), obj.get("subquery")) {
        (Some(Value::String(t)), None) if !t.is_empty() => Ok(Source::Table {
            table: t.clone(),
            alias,
        }),
        (Some(_), None) => Err(err(&format!("{path}/table"), "must be a non-empty string")),
        (None, Some(q)) => Ok(Source::Subquery {
            query: Box::new(query_node(q, &format!("{path}/subquery"))?),
            alias,
        }),
        (Some(_), Some(_)) => Err(err(path, "give either table or subquery, not both")),
        (None, None) => Err(err(&format!("{path}/table"), "missing required field")),
    }
}

fn join(v: &Value, path: &str) -> Result<Join, IrError> {
    let obj = object(v, path)?;
    let mut src = Map::new();
    for (k, val) in obj {
        match k.as_str() {
            "table" | "subquery" | "alias" => {
                src.insert(k.clone(), val.clone());
            }
            "on" | "type" => {}
            _ => return Err(err(&format!("{path}/{k}"), "unknown field")),
        }
    }
    let source = source(&Value::Object(src), path)?;
    let kind = match obj.get("type") {
        None | Some(Value::Null) => JoinType::Inner,
        Some(Value::String(s)) if s.eq_ignore_ascii_case("inner") => JoinType::Inner,
        Some(Value::String(s)) if s.eq_ignore_ascii_case("left") => JoinType::Left,
        Some(_) => return Err(err(&format!("{path}/type"), "must be \"inner\" or \"left\"")),
    };
    let on_path = format!("{path}/on");
    let on = match obj.get("on") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, c)| expr(c, &format!("{on_path}/{i}"), Ctx::Value))
            .collect::<Result<Vec<_>, _>>()?,
        Some(single @ Value::Object(_)) => vec![expr(single, &on_path, Ctx::Value)?],
        Some(_) => return Err(err(&on_path, "expected a condition or an array of conditions")),
    };
    Ok(Join { kind, source, on })
}

fn order_item(v: &Value, path: &str) -> Result<OrderItem, IrError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "expr" | "direction") {
            return Err(err(&format!("{path}/{key}"), "unknown field"));
        }
    }
    let epath = format!("{path}/expr");
    let e = obj.get("expr").ok_or_else(|| err(&epath, "missing required field"))?;
    let direction = match obj.get("direction") {
        None | Some(Value::Null) => Direction::Asc,
        Some(Value::String(d)) if d.eq_ignore_ascii_case("asc") => Direction::Asc,
        Some(Value::String(d)) if d.eq_ignore_ascii_case("desc") => Direction::Desc,
        Some(_) => return Err(err(&format!("{path}/direction"), "must be \"asc\" or \"desc\"")),
    };
    Ok(OrderItem {
        expr: expr(e, &epath, Ctx::Value)?,
        direction,
    })
}

/// Where an expression appears; stars are only legal in some places.
#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    SelectItem,
    SoleArgument,
    Value,
    SetRhs,
}

fn expr(v: &Value, path: &str, ctx: Ctx) -> Result<IrExpr, IrError> {
    let obj = object(v, path)?;
    let only = |allowed: &[&str]| -> Result<(), IrError> {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(err(&format!("{path}/{key}"), "unknown field"));
            }
        }
        Ok(())
    };

    if obj.contains_key("col") {
        only(&["col"])?;
        let cpath = format!("{path}/col");
        let pair = obj["col"]
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| err(&cpath, "must be a [table, column] pair"))?;
        let part = |i: usize| -> Result<String, IrError> {
            match &pair[i] {
                Value::String(s) if !s.is_empty() => Ok(s.clone()),
                _ => Err(err(&format!("{cpath}/{i}"), "must be a non-empty string")),
            }
        };
        let (table, column) = (part(0)?, part(1)?);
        if column == "*" {
            if ctx != Ctx::SelectItem {
                return Err(err(&cpath, "table.* is only allowed as a select item"));
            }
            return Ok(IrExpr::TableStar(table));
        }
        return Ok(IrExpr::Column { table, column });
    }
    if obj.contains_key("star") {
        only(&["star"])?;
        if obj["star"] != Value::Bool(true) {
            return Err(err(&format!("{path}/star"), "must be true"));
        }
        if !matches!(ctx, Ctx::SelectItem | Ctx::SoleArgument) {
            return Err(err(path, "* is only allowed as a select item or sole function argument"));
        }
        return Ok(IrExpr::Star);
    }
    if obj.contains_key("value") {
        only(&["value"])?;
        let lit = match &obj["value"] {
            Value::Null => IrLiteral::Null,
            Value::Bool(b) => IrLiteral::Bool(*b),
            Value::Number(n) => IrLiteral::Number(n.to_string()),
            Value::String(s) => IrLiteral::String(s.clone()),
            _ => return Err(err(&format!("{path}/value"), "must be a scalar")),
        };
        return Ok(IrExpr::Literal(lit));
    }
    if obj.contains_key("func") {
        only(&["func", "args", "distinct"])?;
        let name = match &obj["func"] {
            Value::String(s) => s.to_ascii_uppercase(),
            _ => return Err(err(&format!("{path}/func"), "must be a string")),
        };
        if !FUNCTIONS.contains(&name.as_str()) {
            return Err(err(&format!("{path}/func"), format!("unknown function `{name}`")));
        }
        let args_v: &[Value] = match obj.get("args") {
            None | Some(Value::Null) => &[],
            Some(Value::Array(a)) => a,
            Some(_) => return Err(err(&format!("{path}/args"), "expected an array")),
        };
        let arg_ctx = if args_v.len() == 1 { Ctx::SoleArgument } else { Ctx::Value };
        let args = args_v
            .iter()
            .enumerate()
            .map(|(i, a)| expr(a, &format!("{path}/args/{i}"), arg_ctx))
            .collect::<Result<Vec<_>, _>>()?;
        let distinct = match obj.get("distinct") {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => return Err(err(&format!("{path}/distinct"), "must be a boolean")),
        };
        if distinct && (args.len() != 1 || args[0] == IrExpr::Star) {
            return Err(err(&format!("{path}/distinct"), "DISTINCT needs exactly one non-star argument"));
        }
        return Ok(IrExpr::Function { name, args, distinct });
    }
    if obj.contains_key("op") {
        only(&["op", "left", "right"])?;
        let op = obj["op"]
            .as_str()
            .and_then(IrOp::parse)
            .ok_or_else(|| err(&format!("{path}/op"), "unknown operator"))?;
        let side = |name: &str, ctx: Ctx| -> Result<IrExpr, IrError> {
            let p = format!("{path}/{name}");
            let v = obj.get(name).ok_or_else(|| err(&p, "missing required field"))?;
            expr(v, &p, ctx)
        };
        let left = side("left", Ctx::Value)?;
        let right = side("right", if op.takes_set() { Ctx::SetRhs } else { Ctx::Value })?;
        if op.takes_set() && !matches!(right, IrExpr::List(_) | IrExpr::Subquery(_)) {
            return Err(err(&format!("{path}/right"), "IN needs a list or a subquery"));
        }
        return Ok(IrExpr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        });
    }
    if obj.contains_key("list") {
        only(&["list"])?;
        if ctx != Ctx::SetRhs {
            return Err(err(path, "a list is only allowed on the right of IN"));
        }
        let items = obj["list"]
            .as_array()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| err(&format!("{path}/list"), "must be a non-empty array"))?;
        return items
            .iter()
            .enumerate()
            .map(|(i, e)| expr(e, &format!("{path}/list/{i}"), Ctx::Value))
            .collect::<Result<Vec<_>, _>>()
            .map(IrExpr::List);
    }
    for (field, min) in [("or", 2), ("and", 1)] {
        if obj.contains_key(field) {
            only(&[field])?;
            let items = obj[field]
                .as_array()
                .filter(|a| a.len() >= min)
                .ok_or_else(|| err(&format!("{path}/{field}"), format!("must be an array of at least {min}")))?;
            let parts = items
                .iter()
                .enumerate()
                .map(|(i, e)| expr(e, &format!("{path}/{field}/{i}"), Ctx::Value))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(if field == "or" { IrExpr::Or(parts) } else { IrExpr::And(parts) });
        }
    }
    if obj.contains_key("not") {
        only(&["not"])?;
        return Ok(IrExpr::Not(Box::new(expr(&obj["not"], &format!("{path}/not"), Ctx::Value)?)));
    }
    if obj.contains_key("type") {
        return Ok(IrExpr::Subquery(Box::new(query_node(v, path)?)));
    }
    Err(err(path, "unrecognised expression"))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const STADIUM: &str = r#"{
      "type": "query",
      "query": {
        "select": [
          {"expr": {"col": ["stadium", "Name"]}, "alias": null},
          {"expr": {"col": ["stadium", "Capacity"]}, "alias": null}
        ],
        "from": {"table": "stadium", "alias": null},
        "joins": [],
        "where": [],
        "group_by": [],
        "having": [],
        "order_by": [
          {"expr": {"col": ["stadium", "Average"]}, "direction": "desc"}
        ],
        "limit": 1,
        "distinct": false
      }
    }"#;

    fn schema_path(raw: &str) -> String {
        match validate_ir(raw) {
            Err(IrError::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn stadium_example_validates() {
        let ir = validate_ir(STADIUM).unwrap();
        assert_eq!(ir.select.len(), 2);
        assert_eq!(ir.order_by[0].direction, Direction::Desc);
        assert_eq!(ir.limit, Some(1));
        assert!(!ir.distinct);
        assert_eq!(
            ir.from,
            Source::Table {
                table: "stadium".into(),
                alias: None
            }
        );
    }

    #[test]
    fn fenced_output_accepted() {
        assert!(validate_ir(&format!("```json\n{STADIUM}\n```")).is_ok());
    }

    #[test]
    fn not_json() {
        assert!(matches!(validate_ir("hello"), Err(IrError::Json(_))));
    }

    #[test]
    fn schema_paths() {
        assert_eq!(schema_path(r#"{"type":"query","query":{"from":{"table":"t"}}}"#), "/query/select");
        assert_eq!(schema_path(r#"{"type":"sql","query":{}}"#), "/type");
        assert_eq!(schema_path(r#"[1]"#), "/");
        assert_eq!(
            schema_path(r#"{"type":"query","query":{"select":[{"expr":{"col":["t"]}}],"from":{"table":"t"}}}"#),
            "/query/select/0/expr/col"
        );
        assert_eq!(
            schema_path(
                r#"{"type":"query","query":{"select":[{"expr":{"star":true}}],"from":{"table":"t"},
                "order_by":[{"expr":{"col":["t","a"]},"direction":"up"}]}}"#
            ),
            "/query/order_by/0/direction"
        );
        assert_eq!(
            schema_path(
                r#"{"type":"query","query":{"select":[{"expr":{"func":"explode","args":[]}}],"from":{"table":"t"}}}"#
            ),
            "/query/select/0/expr/func"
        );
        assert_eq!(
            schema_path(r#"{"type":"query","query":{"select":[{"expr":{"star":true}}],"from":{"table":"t"},"limit":-1}}"#),
            "/query/limit"
        );
        assert_eq!(
            schema_path(
                r#"{"type":"query","query":{"select":[{"expr":{"star":true}}],"from":{"table":"t"},
                "where":[{"op":"=","left":{"star":true},"right":{"value":1}}]}}"#
            ),
            "/query/where/0/left"
        );
        assert_eq!(
            schema_path(r#"{"type":"query","query":{"select":[{"expr":{"star":true},"alias":"a"}],"from":{"table":"t"}}}"#),
            "/query/select/0/alias"
        );
        assert_eq!(
            schema_path(r#"{"type":"query","query":{"select":[{"expr":{"star":true}}],"from":{"table":"t"},"extra":1}}"#),
            "/query/extra"
        );
    }

    #[test]
    fn nested_subquery_and_in_list() {
        let raw = r#"{"type":"query","query":{
            "select":[{"expr":{"col":["t","a"]}}],
            "from":{"table":"t"},
            "where":[
              {"op":"=","left":{"col":["t","b"]},"right":{"type":"query","query":{
                 "select":[{"expr":{"func":"min","args":[{"col":["u","b"]}]}}],"from":{"table":"u"}}}},
              {"op":"not in","left":{"col":["t","c"]},"right":{"list":[{"value":1},{"value":"x"}]}}
            ]}}"#;
        let ir = validate_ir(raw).unwrap();
        assert_eq!(ir.where_.len(), 2);
        assert!(matches!(&ir.where_[1], IrExpr::Binary { op: IrOp::NotIn, .. }));
    }
}
