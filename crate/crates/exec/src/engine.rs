use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};

/// Default per-query limit.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Virtual-machine steps between deadline checks.
const PROGRESS_STEPS: i32 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum Value {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
    Blob(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: usize,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Ok,
    Error,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub status: ExecStatus,
    pub result: Option<ResultTable>,
    pub message: Option<String>,
    /// Wall time; never written to reports.
    #[serde(skip)]
    pub elapsed_ms: u64,
}

impl ExecOutcome {
    fn ok(result: ResultTable, start: Instant) -> Self {
        ExecOutcome {
            status: ExecStatus::Ok,
            result: Some(result),
            message: None,
            elapsed_ms: start.elapsed().as_millis() as u64,
        }
    }

    fn failed(status: ExecStatus, message: impl Into<String>, start: Instant) -> Self {
        ExecOutcome {
            status,
            result: None,
            message: Some(message.into()),
            elapsed_ms: start.elapsed().as_millis() as u64,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ExecStatus::Ok
    }
}

/// Runs queries read-only, keeping one connection per database file.
/// Not shared between threads; give each worker its own.
pub struct Executor {
    timeout: Duration,
    conns: HashMap<PathBuf, Connection>,
}

impl Executor {
    pub fn new(timeout: Duration) -> Self {
        Executor {
            timeout,
            conns: HashMap::new(),
        }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn connection(&mut self, db: &Path) -> Result<&Connection, String> {
        if !self.conns.contains_key(db) {
            if !db.is_file() {
                return Err(format!("db-not-found: {}", db.display()));
            }
            let conn = Connection::open_with_flags(
                db,
                OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX,
            )
            .map_err(|e| format!("db-open-failed: {e}"))?;
            conn.pragma_update(None, "query_only", true)
                .map_err(|e| format!("db-open-failed: {e}"))?;
            self.conns.insert(db.to_path_buf(), conn);
        }
        Ok(&self.conns[db])
    }

    pub fn execute(&mut self, db: &Path, sql: &str) -> ExecOutcome {
        let start = Instant::now();
        let timeout = self.timeout;
        let conn = match self.connection(db) {
            Ok(c) => c,
            Err(m) => return ExecOutcome::failed(ExecStatus::Error, m, start),
        };
        let sql = sql.trim().trim_end_matches(';').trim_end();
        if sql.is_empty() {
            return ExecOutcome::failed(ExecStatus::Error, "empty query", start);
        }
        let deadline = start + timeout;
        conn.progress_handler(PROGRESS_STEPS, Some(move || Instant::now() >= deadline));
        let outcome = run(conn, sql);
        conn.progress_handler(PROGRESS_STEPS, None::<fn() -> bool>);
        match outcome {
            Ok(table) => ExecOutcome::ok(table, start),
            Err(RunError::Sql(e)) if is_interrupt(&e) && Instant::now() >= deadline => {
                ExecOutcome::failed(ExecStatus::Timeout, format!("timeout after {} ms", timeout.as_millis()), start)
            }
            Err(RunError::Sql(e)) => ExecOutcome::failed(ExecStatus::Error, e.to_string(), start),
            Err(RunError::Rejected) => {
                ExecOutcome::failed(ExecStatus::Error, "rejected-write: statement modifies the database", start)
            }
        }
    }
}

fn is_interrupt(e: &rusqlite::Error) -> bool {
    matches!(e, rusqlite::Error::SqliteFailure(f, _) if f.code == rusqlite::ErrorCode::OperationInterrupted)
}

enum RunError {
    Sql(rusqlite::Error),
    Rejected,
}

impl From<rusqlite::Error> for RunError {
    fn from(e: rusqlite::Error) -> Self {
        RunError::Sql(e)
    }
}

fn run(conn: &Connection, sql: &str) -> Result<ResultTable, RunError> {
    let mut stmt = conn.prepare(sql)?;
    if !stmt.readonly() {
        return Err(RunError::Rejected);
    }
    let columns = stmt.column_count();
    let mut rows = stmt.query([])?;
    let mut out = Vec::new();
    while let Some(row) = rows.next()? {
        let mut vals = Vec::with_capacity(columns);
        for i in 0..columns {
            vals.push(match row.get_ref(i)? {
                ValueRef::Null => Value::Null,
                ValueRef::Integer(v) => Value::Integer(v),
                ValueRef::Real(v) => Value::Real(v),
                ValueRef::Text(t) => Value::Text(String::from_utf8_lossy(t).into_owned()),
                ValueRef::Blob(b) => Value::Blob(b.to_vec()),
            });
        }
        out.push(vals);
    }
    Ok(ResultTable { columns, rows: out })
}

/// One-off execution with a fresh connection.
pub fn execute_query(db: &Path, sql: &str, timeout: Duration) -> ExecOutcome {
    Executor::new(timeout).execute(db, sql)
}
