use proptest::collection::vec;
use proptest::prelude::*;
use sqlshape_core::canon::canonical_key;
use sqlshape_core::ir::*;
use sqlshape_core::sql::{parse_sql, Dialect};

const TABLES: [&str; 4] = ["singer", "my table", "order", "T1"];
const COLUMNS: [&str; 5] = ["Name", "age", "group", "unit price", "9lives"];

fn column() -> impl Strategy<Value = IrExpr> {
    (0..TABLES.len(), 0..COLUMNS.len()).prop_map(|(t, c)| IrExpr::Column {
        table: TABLES[t].into(),
        column: COLUMNS[c].into(),
    })
}

fn literal() -> impl Strategy<Value = IrExpr> {
    prop_oneof![
        Just(IrLiteral::Null),
        any::<bool>().prop_map(IrLiteral::Bool),
        (-1000i64..1000).prop_map(|n| IrLiteral::Number(n.to_string())),
        (0u32..1000).prop_map(|n| IrLiteral::Number(format!("{}.5", n))),
        "[a-z' %]{0,8}".prop_map(IrLiteral::String),
    ]
    .prop_map(IrExpr::Literal)
}

fn value() -> impl Strategy<Value = IrExpr> {
    let leaf = prop_oneof![column(), literal()];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (prop_oneof![Just("ABS"), Just("UPPER"), Just("LENGTH")], inner.clone()).prop_map(|(n, a)| IrExpr::Function {
                name: n.into(),
                args: vec![a],
                distinct: false,
            }),
            vec(inner.clone(), 2..4).prop_map(|args| IrExpr::Function {
                name: "COALESCE".into(),
                args,
                distinct: false,
            }),
            (prop_oneof![Just(IrOp::Add), Just(IrOp::Sub), Just(IrOp::Mul), Just(IrOp::Div)], inner.clone(), inner)
                .prop_map(|(op, l, r)| IrExpr::Binary {
                    op,
                    left: Box::new(l),
                    right: Box::new(r),
                }),
        ]
    })
}

fn comparison() -> impl Strategy<Value = IrExpr> {
    let cmp = prop_oneof![
        Just(IrOp::Eq),
        Just(IrOp::NotEq),
        Just(IrOp::Lt),
        Just(IrOp::GtEq),
        Just(IrOp::Like),
        Just(IrOp::NotLike),
        Just(IrOp::Is),
        Just(IrOp::IsNot),
    ];
    prop_oneof![
        (cmp, value(), value()).prop_map(|(op, l, r)| IrExpr::Binary {
            op,
            left: Box::new(l),
            right: Box::new(r),
        }),
        (prop_oneof![Just(IrOp::In), Just(IrOp::NotIn)], column(), vec(literal(), 1..4)).prop_map(|(op, l, items)| {
            IrExpr::Binary {
                op,
                left: Box::new(l),
                right: Box::new(IrExpr::List(items)),
            }
        }),
    ]
}

fn condition() -> impl Strategy<Value = IrExpr> {
    comparison().prop_recursive(2, 12, 3, |inner| {
        prop_oneof![
            vec(inner.clone(), 2..4).prop_map(IrExpr::Or),
            vec(inner.clone(), 1..3).prop_map(IrExpr::And),
            inner.prop_map(|c| IrExpr::Not(Box::new(c))),
        ]
    })
}

fn select_item() -> impl Strategy<Value = SelectItem> {
    let expr = prop_oneof![
        4 => value(),
        1 => Just(IrExpr::Star),
        1 => (0..TABLES.len()).prop_map(|t| IrExpr::TableStar(TABLES[t].into())),
        1 => Just(IrExpr::Function { name: "COUNT".into(), args: vec![IrExpr::Star], distinct: false }),
        1 => column().prop_map(|c| IrExpr::Function { name: "COUNT".into(), args: vec![c], distinct: true }),
    ];
    (expr, proptest::option::of(prop_oneof![Just("n"), Just("total count"), Just("from")])).prop_map(|(expr, alias)| {
        let star = matches!(expr, IrExpr::Star | IrExpr::TableStar(_));
        SelectItem {
            alias: alias.filter(|_| !star).map(String::from),
            expr,
        }
    })
}

fn source() -> impl Strategy<Value = Source> {
    (0..TABLES.len(), proptest::option::of(prop_oneof![Just("T1"), Just("a b"), Just("x")])).prop_map(|(t, alias)| {
        Source::Table {
            table: TABLES[t].into(),
            alias: alias.map(String::from),
        }
    })
}

fn query_ir() -> impl Strategy<Value = QueryIr> {
    (
        vec(select_item(), 1..4),
        source(),
        vec(
            (any::<bool>(), source(), vec(comparison(), 0..3)).prop_map(|(left, source, on)| Join {
                kind: if left { JoinType::Left } else { JoinType::Inner },
                source,
                on,
            }),
            0..3,
        ),
        vec(condition(), 0..3),
        vec(column(), 0..2),
        vec(condition(), 0..2),
        vec(
            (value(), any::<bool>()).prop_map(|(expr, d)| OrderItem {
                expr,
                direction: if d { Direction::Desc } else { Direction::Asc },
            }),
            0..3,
        ),
        proptest::option::of(0u64..1000),
        any::<bool>(),
    )
        .prop_map(|(select, from, joins, where_, group_by, having, order_by, limit, distinct)| QueryIr {
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

/// Nests a generated query as a FROM subquery and as an IN subquery.
fn nested_ir() -> impl Strategy<Value = QueryIr> {
    (query_ir(), query_ir(), query_ir(), column()).prop_map(|(mut outer, from_q, mut in_q, c)| {
        outer.from = Source::Subquery {
            query: Box::new(from_q),
            alias: Some("sub".into()),
        };
        in_q.select.truncate(1);
        outer.where_.push(IrExpr::Binary {
            op: IrOp::In,
            left: Box::new(c),
            right: Box::new(IrExpr::Subquery(Box::new(in_q))),
        });
        outer
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn compiled_sql_parses_and_keys_stably(ir in prop_oneof![3 => query_ir(), 1 => nested_ir()]) {
        let sql = compile_ir(&ir).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(compile_ir(&ir).unwrap(), sql.clone());
        parse_sql(&sql, Dialect::Sqlite).map_err(|e| TestCaseError::fail(format!("{sql}\n{e}")))?;
        let k = canonical_key(&sql, Dialect::Sqlite).unwrap();
        prop_assert_eq!(canonical_key(&k.key, Dialect::Sqlite).unwrap(), k);
    }

    #[test]
    fn pipeline_flags_are_monotone(cut in 0usize..400, drop in proptest::option::of(0usize..400), fence in any::<bool>()) {
        let full = r#"{"type":"query","query":{"select":[{"expr":{"col":["stadium","Name"]}}],
            "from":{"table":"stadium"},"where":[{"op":">","left":{"col":["stadium","Capacity"]},"right":{"value":5000}}],
            "order_by":[{"expr":{"col":["stadium","Average"]},"direction":"desc"}],"limit":1}}"#;
        let mut raw: String = full.chars().take(cut.max(1)).collect();
        if let Some(d) = drop {
            if d < raw.len() && raw.is_char_boundary(d) {
                raw.remove(d);
            }
        }
        if fence {
            raw = format!("```json\n{raw}\n```");
        }
        let r = process_output("q", &raw);
        prop_assert!(!r.end_to_end || r.compilable);
        prop_assert!(!r.compilable || r.json_valid);
        prop_assert!(!r.sql_parses || r.compilable);
        prop_assert_eq!(r.sql.is_some(), r.compilable);
        let mut executed = r.clone();
        executed.set_executed(false);
        prop_assert!(!executed.end_to_end);
    }
}
