//! JSON query representation and its compiler to SQLite SQL.
//!
//! A model emits `{"type": "query", "query": {...}}` with the fields
//! `select, from, joins, where, group_by, having, order_by, limit, distinct`.
//! [`validate_ir`] turns raw text into a typed [`QueryIr`], reporting the
//! JSON-pointer path of the first violation; [`compile_ir`] lowers it to SQL
//! with a fixed clause order. The published JSON Schema lives in
//! `schema/query_ir.schema.json` at the crate root.

mod compile;
mod pipeline;
mod validate;

use std::fmt;

use thiserror::Error;

pub use compile::compile_ir;
pub use pipeline::{pipeline_metrics, process_output, PipelineRates, PipelineRecord};
pub use validate::{validate_ir, validate_value, FUNCTIONS};

/// Version of the IR layout accepted by this crate.
pub const IR_VERSION: u32 = 1;

/// The JSON Schema document describing the IR.
pub const IR_SCHEMA: &str = include_str!("../../schema/query_ir.schema.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("cannot compile: {0}")]
    Compile(String),
    #[error("no records")]
    NoData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryIr {
    pub select: Vec<SelectItem>,
    pub from: Source,
    pub joins: Vec<Join>,
    pub where_: Vec<IrExpr>,
    pub group_by: Vec<IrExpr>,
    pub having: Vec<IrExpr>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<u64>,
    pub distinct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectItem {
    pub expr: IrExpr,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Table { table: String, alias: Option<String> },
    Subquery { query: Box<QueryIr>, alias: Option<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinType {
    Inner,
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub kind: JoinType,
    pub source: Source,
    /// Conditions joined with AND; empty means no ON clause.
    pub on: Vec<IrExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: IrExpr,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrLiteral {
    Null,
    Bool(bool),
    /// Number in its JSON spelling.
    Number(String),
    String(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrOp {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Like,
    NotLike,
    In,
    NotIn,
    Is,
    IsNot,
    Add,
    Sub,
    Mul,
    Div,
}

impl IrOp {
    pub const ALL: [(&'static str, IrOp); 17] = [
        ("=", IrOp::Eq),
        ("!=", IrOp::NotEq),
        ("<>", IrOp::NotEq),
        ("<", IrOp::Lt),
        ("<=", IrOp::LtEq),
        (">", IrOp::Gt),
        (">=", IrOp::GtEq),
        ("LIKE", IrOp::Like),
        ("NOT LIKE", IrOp::NotLike),
        ("IN", IrOp::In),
        ("NOT IN", IrOp::NotIn),
        ("IS", IrOp::Is),
        ("IS NOT", IrOp::IsNot),
        ("+", IrOp::Add),
        ("-", IrOp::Sub),
        ("*", IrOp::Mul),
        ("/", IrOp::Div),
    ];

    pub fn parse(s: &str) -> Option<IrOp> {
        let norm = s.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_uppercase();
        Self::ALL.iter().find(|(k, _)| *k == norm).map(|(_, op)| *op)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            IrOp::Eq => "=",
            IrOp::NotEq => "!=",
            IrOp::Lt => "<",
            IrOp::LtEq => "<=",
            IrOp::Gt => ">",
            IrOp::GtEq => ">=",
            IrOp::Like => "LIKE",
            IrOp::NotLike => "NOT LIKE",
            IrOp::In => "IN",
            IrOp::NotIn => "NOT IN",
            IrOp::Is => "IS",
            IrOp::IsNot => "IS NOT",
            IrOp::Add => "+",
            IrOp::Sub => "-",
            IrOp::Mul => "*",
            IrOp::Div => "/",
        }
    }

    pub fn takes_set(self) -> bool {
        matches!(self, IrOp::In | IrOp::NotIn)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrExpr {
    Column { table: String, column: String },
    /// `table.*`; select lists only.
    TableStar(String),
    /// `*`; select lists and as the sole function argument.
    Star,
    Literal(IrLiteral),
    Function { name: String, args: Vec<IrExpr>, distinct: bool },
    Binary { op: IrOp, left: Box<IrExpr>, right: Box<IrExpr> },
    /// Right-hand side of IN.
    List(Vec<IrExpr>),
    Or(Vec<IrExpr>),
    And(Vec<IrExpr>),
    Not(Box<IrExpr>),
    Subquery(Box<QueryIr>),
}

impl fmt::Display for QueryIr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match compile_ir(self) {
            Ok(sql) => f.write_str(&sql),
            Err(e) => write!(f, "<{e}>"),
        }
    }
}
