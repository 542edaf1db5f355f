use serde::{Deserialize, Serialize};
use sqlshape_core::metrics::GenerationMode;
use sqlshape_core::schema::SchemaCatalog;

use crate::GenError;

const DIRECT_SQL: &str = "You are an expert SQL generator.
Use SQLite dialect.
Only output ONE SQL query, no explanation.

Database ID: <db_id>

Database schema (JSON):
<schema_json>

Question:
<natural_language_question>

SQL:";

const COMPILE_STYLE: &str = "You are an expert Text-to-SQL system for the Spider benchmark.
Your task is to write a structured JSON representation of a SQL query
for the given question and database schema.

Requirements:

- Use ONLY tables and columns that exist in the provided schema.
- Assume the database uses the SQLite dialect.
- You MUST output a single JSON object, and nothing else (no explanations).
- The JSON must describe the logical structure of the SQL query with the following fields:
  - type: \"query\"
  - query: {
    select: [ ... ],
    from: { ... },
    joins: [ ... ],
    where: [ ... ],
    group_by: [ ... ],
    having: [ ... ],
    order_by: [ ... ],
    limit: ...,
    distinct: ...
  }
- Do NOT include any natural language text in the JSON.

Database ID: {db_id}

Database schema (JSON):
{schema_json}

Question:
{question}

Now output ONLY the JSON object for the query structure:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    DirectSql,
    CompileStyle,
}

impl From<GenerationMode> for PromptMode {
    fn from(m: GenerationMode) -> Self {
        match m {
            GenerationMode::Direct => PromptMode::DirectSql,
            GenerationMode::Compile => PromptMode::CompileStyle,
        }
    }
}

/// Template text plus the literal placeholder strings for database id,
/// schema JSON and question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub mode: PromptMode,
    pub text: String,
    pub db_id: String,
    pub schema_json: String,
    pub question: String,
}

impl PromptTemplate {
    pub fn direct_sql() -> Self {
        PromptTemplate {
            mode: PromptMode::DirectSql,
            text: DIRECT_SQL.into(),
            db_id: "<db_id>".into(),
            schema_json: "<schema_json>".into(),
            question: "<natural_language_question>".into(),
        }
    }

    pub fn compile_style() -> Self {
        PromptTemplate {
            mode: PromptMode::CompileStyle,
            text: COMPILE_STYLE.into(),
            db_id: "{db_id}".into(),
            schema_json: "{schema_json}".into(),
            question: "{question}".into(),
        }
    }

    pub fn for_mode(mode: PromptMode) -> Self {
        match mode {
            PromptMode::DirectSql => Self::direct_sql(),
            PromptMode::CompileStyle => Self::compile_style(),
        }
    }
}

/// Substitutes the three placeholders in one pass. Each must occur exactly
/// once in the template.
pub fn render_prompt(t: &PromptTemplate, question: &str, schema: &SchemaCatalog) -> Result<String, GenError> {
    let schema_json = schema.prompt_json();
    let subs = [
        (&t.db_id, schema.db_id.as_str()),
        (&t.schema_json, schema_json.as_str()),
        (&t.question, question),
    ];
    let mut spots = Vec::with_capacity(3);
    for (ph, value) in subs {
        let found: Vec<usize> = t.text.match_indices(ph.as_str()).map(|(i, _)| i).collect();
        match found.as_slice() {
            [i] => spots.push((*i, ph.len(), value)),
            [] => return Err(GenError::Template(format!("placeholder {ph} missing"))),
            _ => return Err(GenError::Template(format!("placeholder {ph} occurs more than once"))),
        }
    }
    spots.sort_by_key(|s| s.0);
    let mut out = String::with_capacity(t.text.len() + schema_json.len() + question.len());
    let mut at = 0;
    for (i, len, value) in spots {
        out.push_str(&t.text[at..i]);
        out.push_str(value);
        at = i + len;
    }
    out.push_str(&t.text[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sqlshape_core::schema::{ForeignKey, TableSchema};

    fn stadium() -> SchemaCatalog {
        SchemaCatalog {
            db_id: "concert_singer".into(),
            tables: vec![TableSchema {
                table_name: "stadium".into(),
                columns: vec!["Stadium_ID".into(), "Name".into()],
            }],
            foreign_keys: vec![ForeignKey {
                source_table: "concert".into(),
                source_column: "Stadium_ID".into(),
                target_table: "stadium".into(),
                target_column: "Stadium_ID".into(),
            }],
        }
    }

    #[test]
    fn direct_prompt() {
        let p = render_prompt(&PromptTemplate::direct_sql(), "Largest stadium?", &stadium()).unwrap();
        assert!(p.contains("Use SQLite dialect."));
        assert!(p.contains("Database ID: concert_singer\n"));
        assert!(p.contains("\"table_name\": \"stadium\""));
        assert!(p.ends_with("Question:\nLargest stadium?\n\nSQL:"));
        assert_eq!(p, render_prompt(&PromptTemplate::direct_sql(), "Largest stadium?", &stadium()).unwrap());
    }

    #[test]
    fn compile_prompt() {
        let p = render_prompt(&PromptTemplate::compile_style(), "q", &stadium()).unwrap();
        assert!(p.contains("select: [ ... ],\n    from: { ... },\n    joins: [ ... ],\n    where: [ ... ],"));
        assert!(!p.contains("{db_id}") && !p.contains("{question}"));
    }

    #[test]
    fn substitutions_are_not_rescanned() {
        let p = render_prompt(&PromptTemplate::direct_sql(), "what is <db_id>?", &stadium()).unwrap();
        assert!(p.contains("what is <db_id>?"));
    }

    #[test]
    fn missing_placeholder() {
        let mut t = PromptTemplate::direct_sql();
        t.text = t.text.replace("<schema_json>", "");
        assert!(matches!(render_prompt(&t, "q", &stadium()), Err(GenError::Template(_))));
        let mut t = PromptTemplate::direct_sql();
        t.text.push_str("<db_id>");
        assert!(matches!(render_prompt(&t, "q", &stadium()), Err(GenError::Template(_))));
    }
}
