//! Read-only SQLite execution of gold and generated queries, result
//! comparison, and per-question execution/structure reports.

mod compare;
mod engine;
mod report;

pub use compare::{cells_equal, has_outer_order_by, results_equivalent, REAL_TOLERANCE};
pub use engine::{execute_query, ExecOutcome, ExecStatus, Executor, ResultTable, Value, DEFAULT_TIMEOUT};
pub use report::{
    evaluate_generation_set, inconsistency_indicators, indicator_flags, summarize_exec, CandidateOutcome, ExecError,
    ExecReport, ExecSummary, Indicators, Thresholds,
};
