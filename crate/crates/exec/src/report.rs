use std::path::Path;

use serde::{Deserialize, Serialize};
use sqlshape_core::metrics::{
    build_distribution, consistency, diversity, mean_defined, pairwise_similarity_of, GenerationMode, GenerationSet,
    StructureDistribution,
};
use sqlshape_core::store::{fmt_opt, Tabular};
use thiserror::Error;

use crate::compare::{has_outer_order_by, results_equivalent};
use crate::engine::{ExecStatus, Executor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("gold-execution-failed for question {question_id}: {message}")]
    GoldFailed { question_id: String, message: String },
}

/// What happened to one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub status: ExecStatus,
    pub rows: Option<usize>,
    pub message: Option<String>,
    pub exec_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecReport {
    pub question_id: String,
    pub db_id: String,
    pub n: usize,
    /// Comparison was order-sensitive (gold has an outer ORDER BY).
    pub ordered: bool,
    pub candidates: Vec<CandidateOutcome>,
    pub exec_correct: Vec<bool>,
    pub exec_acc: f64,
    pub success_rate: f64,
    /// Distinct structures over all parsed candidates.
    pub distinct_all: usize,
    pub parsed_all: usize,
    /// Structures of the execution-correct candidates.
    pub correct_distribution: StructureDistribution,
    pub distinct_corr: usize,
    pub majority_corr: Option<f64>,
    /// Fraction of equal-structure pairs among parsed correct candidates.
    pub ast_sim_corr: Option<f64>,
}

/// Executes gold and candidates and labels each candidate.
pub fn evaluate_generation_set(
    set: &GenerationSet,
    db: &Path,
    mode: GenerationMode,
    exec: &mut Executor,
) -> Result<ExecReport, ExecError> {
    let gold = exec.execute(db, &set.gold_sql);
    let gold_table = match (gold.status, gold.result) {
        (ExecStatus::Ok, Some(t)) => t,
        _ => {
            return Err(ExecError::GoldFailed {
                question_id: set.question_id.clone(),
                message: gold.message.unwrap_or_else(|| "no result".into()),
            })
        }
    };
    let ordered = has_outer_order_by(&set.gold_sql);

    let mut candidates = Vec::with_capacity(set.candidates.len());
    let mut keys = Vec::with_capacity(set.candidates.len());
    let mut correct_keys = Vec::new();
    for raw in &set.candidates {
        let key = mode.key(raw);
        let outcome = match mode.to_sql(raw) {
            Err(msg) => CandidateOutcome {
                status: ExecStatus::Error,
                rows: None,
                message: Some(msg),
                exec_correct: false,
            },
            Ok(sql) => {
                let o = exec.execute(db, &sql);
                let correct = o
                    .result
                    .as_ref()
                    .is_some_and(|t| results_equivalent(t, &gold_table, ordered));
                CandidateOutcome {
                    status: o.status,
                    rows: o.result.as_ref().map(|t| t.rows.len()),
                    message: o.message,
                    exec_correct: correct,
                }
            }
        };
        if outcome.exec_correct {
            correct_keys.push(key.clone());
        }
        keys.push(key);
        candidates.push(outcome);
    }

    let n = candidates.len();
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let all = build_distribution(&keys);
    let correct_distribution = build_distribution(&correct_keys);
    Ok(ExecReport {
        question_id: set.question_id.clone(),
        db_id: set.db_id.clone(),
        n,
        ordered,
        exec_correct: candidates.iter().map(|c| c.exec_correct).collect(),
        exec_acc: frac(candidates.iter().filter(|c| c.exec_correct).count()),
        success_rate: frac(candidates.iter().filter(|c| c.status == ExecStatus::Ok).count()),
        distinct_all: diversity(&all),
        parsed_all: all.valid_count,
        distinct_corr: diversity(&correct_distribution),
        majority_corr: consistency(&correct_distribution),
        ast_sim_corr: pairwise_similarity_of(&correct_distribution),
        correct_distribution,
        candidates,
    })
}

/// Thresholds for the high-accuracy / low-structure indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub acc: f64,
    pub structure: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { acc: 0.8, structure: 0.5 }
    }
}

/// Whether one question counts toward each indicator.
pub fn indicator_flags(r: &ExecReport, t: Thresholds) -> (bool, bool) {
    let high_acc_low_struct = r.exec_acc >= t.acc && r.majority_corr.is_some_and(|m| m <= t.structure);
    let correct = r.exec_correct.iter().filter(|c| **c).count();
    let struct_diff = correct >= 2 && r.distinct_corr >= 2;
    (high_acc_low_struct, struct_diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub high_acc_low_struct: f64,
    pub exec_corr_struct_diff: f64,
}

/// Fractions of questions flagged by each indicator; `None` for no reports.
pub fn inconsistency_indicators(reports: &[ExecReport], t: Thresholds) -> Option<Indicators> {
    if reports.is_empty() {
        return None;
    }
    let (mut hals, mut diff) = (0usize, 0usize);
    for r in reports {
        let (a, b) = indicator_flags(r, t);
        hals += a as usize;
        diff += b as usize;
    }
    let n = reports.len() as f64;
    Some(Indicators {
        high_acc_low_struct: hals as f64 / n,
        exec_corr_struct_diff: diff as f64 / n,
    })
}

/// One model's execution and reliability row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecSummary {
    pub model: String,
    pub questions: usize,
    /// Questions whose gold query did not execute; not in any mean.
    pub gold_failed: usize,
    pub exec_acc: Option<f64>,
    pub success_rate: Option<f64>,
    pub distinct_all: Option<f64>,
    pub distinct_corr: Option<f64>,
    pub ast_sim_corr: Option<f64>,
    pub high_acc_low_struct: Option<f64>,
    pub exec_corr_struct_diff: Option<f64>,
    pub acc_threshold: f64,
    pub struct_threshold: f64,
}

/// Averages per-question reports. Structure means skip questions where
/// the measure is undefined (nothing parsed, or fewer than two correct).
pub fn summarize_exec(model: &str, reports: &[ExecReport], gold_failed: usize, t: Thresholds) -> ExecSummary {
    let ind = inconsistency_indicators(reports, t);
    ExecSummary {
        model: model.to_string(),
        questions: reports.len() + gold_failed,
        gold_failed,
        exec_acc: mean_defined(reports.iter().map(|r| Some(r.exec_acc))),
        success_rate: mean_defined(reports.iter().map(|r| Some(r.success_rate))),
        distinct_all: mean_defined(reports.iter().filter(|r| r.parsed_all > 0).map(|r| Some(r.distinct_all as f64))),
        distinct_corr: mean_defined(
            reports
                .iter()
                .filter(|r| r.correct_distribution.valid_count > 0)
                .map(|r| Some(r.distinct_corr as f64)),
        ),
        ast_sim_corr: mean_defined(reports.iter().map(|r| r.ast_sim_corr)),
        high_acc_low_struct: ind.map(|i| i.high_acc_low_struct),
        exec_corr_struct_diff: ind.map(|i| i.exec_corr_struct_diff),
        acc_threshold: t.acc,
        struct_threshold: t.structure,
    }
}

impl Tabular for ExecSummary {
    const HEADERS: &'static [&'static str] = &[
        "model",
        "exec_acc",
        "success_rate",
        "distinct_all",
        "distinct_corr",
        "ast_sim_corr",
        "high_acc_low_struct",
        "exec_corr_struct_diff",
        "questions",
        "gold_failed",
        "acc_threshold",
        "struct_threshold",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.model.clone(),
            fmt_opt(self.exec_acc, p),
            fmt_opt(self.success_rate, p),
            fmt_opt(self.distinct_all, p),
            fmt_opt(self.distinct_corr, p),
            fmt_opt(self.ast_sim_corr, p),
            fmt_opt(self.high_acc_low_struct, p),
            fmt_opt(self.exec_corr_struct_diff, p),
            self.questions.to_string(),
            self.gold_failed.to_string(),
            self.acc_threshold.to_string(),
            self.struct_threshold.to_string(),
        ]
    }
}

impl Tabular for ExecReport {
    const HEADERS: &'static [&'static str] = &[
        "question_id",
        "db_id",
        "n",
        "ordered",
        "exec_acc",
        "success_rate",
        "distinct_all",
        "distinct_corr",
        "majority_corr",
        "ast_sim_corr",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.question_id.clone(),
            self.db_id.clone(),
            self.n.to_string(),
            self.ordered.to_string(),
            fmt_opt(Some(self.exec_acc), p),
            fmt_opt(Some(self.success_rate), p),
            self.distinct_all.to_string(),
            self.distinct_corr.to_string(),
            fmt_opt(self.majority_corr, p),
            fmt_opt(self.ast_sim_corr, p),
        ]
    }
}
