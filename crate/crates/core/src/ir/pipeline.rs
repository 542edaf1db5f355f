use serde::{Deserialize, Serialize};

use super::*;
use crate::canon::strip_code_fence;
use crate::sql::{parse_sql, Dialect};

/// Outcome of pushing one model output through validate, compile and parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub question_id: String,
    pub raw: String,
    /// A surrounding code fence was removed before JSON parsing.
    #[serde(default)]
    pub fence_stripped: bool,
    pub json_valid: bool,
    pub compilable: bool,
    pub sql_parses: bool,
    pub end_to_end: bool,
    #[serde(default)]
    pub sql: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

impl PipelineRecord {
    /// Records whether the compiled SQL ran against the database.
    /// End-to-end success then means compiled and executed.
    pub fn set_executed(&mut self, ok: bool) {
        self.end_to_end = self.compilable && ok;
    }
}

/// Runs the static stages. Without a database, `end_to_end` is
/// `compilable && sql_parses`; call [`PipelineRecord::set_executed`] once
/// the SQL has been run.
pub fn process_output(question_id: &str, raw: &str) -> PipelineRecord {
    let fence_stripped = strip_code_fence(raw).trim() != raw.trim();
    let mut rec = PipelineRecord {
        question_id: question_id.to_string(),
        raw: raw.to_string(),
        fence_stripped,
        json_valid: false,
        compilable: false,
        sql_parses: false,
        end_to_end: false,
        sql: None,
        error: None,
    };
    let value: serde_json::Value = match serde_json::from_str(strip_code_fence(raw).trim()) {
        Ok(v) => v,
        Err(e) => {
            rec.error = Some(IrError::Json(e.to_string()).to_string());
            return rec;
        }
    };
    rec.json_valid = true;
    let sql = match validate_value(&value).and_then(|ir| compile_ir(&ir)) {
        Ok(sql) => sql,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.compilable = true;
    match parse_sql(&sql, Dialect::Sqlite) {
        Ok(_) => rec.sql_parses = true,
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec.end_to_end = rec.sql_parses;
    rec.sql = Some(sql);
    rec
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineRates {
    pub records: usize,
    pub json_valid_rate: f64,
    pub compilable_rate: f64,
    pub sql_parse_rate: f64,
    pub end_to_end_rate: f64,
}

pub fn pipeline_metrics(records: &[PipelineRecord]) -> Result<PipelineRates, IrError> {
    if records.is_empty() {
        return Err(IrError::NoData);
    }
    let n = records.len();
    let rate = |f: fn(&PipelineRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n as f64;
    Ok(PipelineRates {
        records: n,
        json_valid_rate: rate(|r| r.json_valid),
        compilable_rate: rate(|r| r.compilable),
        sql_parse_rate: rate(|r| r.sql_parses),
        end_to_end_rate: rate(|r| r.end_to_end),
    })
}
