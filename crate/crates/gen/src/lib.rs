//! Online sampling: renders the generation prompts and draws k outputs
//! per question from an OpenAI-style chat-completions endpoint. Nothing
//! else in the workspace depends on this crate; recorded files replay
//! offline.

mod client;
mod prompt;

use sqlshape_core::schema::SchemaCatalog;
use sqlshape_core::store::{Decoding, GenerationRecord, SpiderQuestion, RECORD_VERSION};
use thiserror::Error;

pub use client::{sample_generations, ProviderConfig, Sample};
pub use prompt::{render_prompt, PromptMode, PromptTemplate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("template: {0}")]
    Template(String),
    #[error("environment variable {0} holding the API token is not set")]
    MissingToken(String),
    #[error("authentication failed (HTTP {0})")]
    Auth(u16),
    #[error("gave up after {retries} retries: {last}")]
    RetriesExhausted { retries: u32, last: String },
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("got {got} outputs, expected {want}")]
    Partial { got: usize, want: usize },
}

impl GenError {
    /// Errors that should stop a whole run rather than one question.
    pub fn is_fatal(&self) -> bool {
        matches!(self, GenError::Auth(_) | GenError::MissingToken(_) | GenError::Template(_))
    }
}

/// Samples one question and packages it as a generation record.
pub fn generate_record(
    cfg: &ProviderConfig,
    template: &PromptTemplate,
    question: &SpiderQuestion,
    catalog: &SchemaCatalog,
    k: usize,
    temperature: f64,
) -> Result<GenerationRecord, GenError> {
    let prompt = render_prompt(template, &question.question, catalog)?;
    let samples = sample_generations(cfg, &prompt, k, temperature)?;
    Ok(GenerationRecord {
        version: RECORD_VERSION,
        question_id: question.question_id.clone(),
        db_id: question.db_id.clone(),
        question: question.question.clone(),
        gold_sql: question.gold_sql.clone(),
        model: cfg.model.clone(),
        decoding: Decoding { temperature, k },
        samples: samples.into_iter().map(|s| s.text).collect(),
        variant_of: None,
        perturbation_kind: None,
    })
}
