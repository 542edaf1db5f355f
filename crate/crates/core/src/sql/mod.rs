//! SQL syntax: tokenizer, typed tree, parser and renderer.

pub mod ast;
pub mod lexer;
mod parser;
mod render;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use parser::{is_reserved, parse_sql};
pub use render::{quote_ident, render_expr, render_query};

/// Input dialect. Only SQLite is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    #[default]
    Sqlite,
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sqlite" => Ok(Dialect::Sqlite),
            other => Err(format!("unsupported dialect `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Syntax,
    Unsupported,
    Empty,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::Syntax => "syntax error",
            FailureReason::Unsupported => "unsupported construct",
            FailureReason::Empty => "empty input",
        })
    }
}

/// Why a query could not be turned into a tree. Counted as the failed
/// outcome in structure distributions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, thiserror::Error)]
pub struct ParseFailure {
    pub reason: FailureReason,
    pub message: String,
    /// Character offset into the input, when known.
    pub offset: Option<usize>,
}

impl ParseFailure {
    pub fn new(reason: FailureReason, message: impl Into<String>, offset: Option<usize>) -> Self {
        ParseFailure {
            reason,
            message: message.into(),
            offset,
        }
    }
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.message)?;
        if let Some(off) = self.offset {
            write!(f, " at offset {off}")?;
        }
        Ok(())
    }
}
