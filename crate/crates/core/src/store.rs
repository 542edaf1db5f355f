//! Dataset loading, generation-record files and report writing.
//!
//! Spider layout: `dev.json` (questions), `tables.json` (schemas) and
//! `database/<db_id>/<db_id>.sqlite`. Question ids are the zero-based
//! positions in `dev.json`.
//!
//! Generation records are JSONL, one object per line:
//!
//! ```text
//! {"version": 1, "question_id": "0", "db_id": "concert_singer",
//!  "question": "...", "gold_sql": "...", "model": "m",
//!  "decoding": {"temperature": 1.0, "k": 10}, "samples": ["...", ...],
//!  "variant_of": null, "perturbation_kind": null}
//! ```
//!
//! An entry with `variant_of` set is a perturbed copy of the named base
//! entry (same model) and `perturbation_kind` says which kind.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{PipelineRates, PipelineRecord};
use crate::metrics::{GenerationSet, Provenance, QuestionMetrics, StructureSummary};
use crate::robustness::{FamilyRecord, PerturbationKind, RobustnessSummary, VariantFamily};
use crate::schema::{ForeignKey, SchemaCatalog, TableSchema};

/// Version written into new generation records.
pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: required file is missing")]
    Missing(PathBuf),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Line { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------- spider

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderQuestion {
    pub question_id: String,
    pub db_id: String,
    pub question: String,
    pub gold_sql: String,
}

#[derive(Debug, Clone, Default)]
pub struct SpiderDataset {
    pub root: PathBuf,
    pub questions: Vec<SpiderQuestion>,
    /// In `tables.json` order.
    pub catalogs: Vec<SchemaCatalog>,
    /// Databases whose SQLite file exists.
    pub db_paths: BTreeMap<String, PathBuf>,
    pub warnings: Vec<String>,
}

impl SpiderDataset {
    pub fn catalog(&self, db_id: &str) -> Option<&SchemaCatalog> {
        self.catalogs.iter().find(|c| c.db_id == db_id)
    }

    pub fn db_path(&self, db_id: &str) -> Option<&Path> {
        self.db_paths.get(db_id).map(PathBuf::as_path)
    }

    pub fn question(&self, question_id: &str) -> Option<&SpiderQuestion> {
        self.questions.iter().find(|q| q.question_id == question_id)
    }
}

#[derive(Deserialize)]
struct RawQuestion {
    db_id: String,
    question: String,
    query: String,
}

#[derive(Deserialize)]
struct RawTables {
    db_id: String,
    table_names_original: Vec<String>,
    column_names_original: Vec<(i64, String)>,
    #[serde(default)]
    foreign_keys: Vec<(usize, usize)>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    if !path.is_file() {
        return Err(StoreError::Missing(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn catalog_from_raw(raw: RawTables, path: &Path) -> Result<SchemaCatalog, StoreError> {
    let bad = |message: String| StoreError::Format {
        path: path.to_path_buf(),
        message: format!("{}: {message}", raw.db_id),
    };
    let mut tables: Vec<TableSchema> = raw
        .table_names_original
        .iter()
        .map(|t| TableSchema {
            table_name: t.clone(),
            columns: Vec::new(),
        })
        .collect();
    for (ti, name) in &raw.column_names_original {
        if *ti < 0 {
            continue;
        }
        let t = tables
            .get_mut(*ti as usize)
            .ok_or_else(|| bad(format!("column {name} names table index {ti}")))?;
        t.columns.push(name.clone());
    }
    let endpoint = |ci: usize| -> Result<(String, String), StoreError> {
        match raw.column_names_original.get(ci) {
            Some((ti, c)) if *ti >= 0 && (*ti as usize) < raw.table_names_original.len() => {
                Ok((raw.table_names_original[*ti as usize].clone(), c.clone()))
            }
            _ => Err(bad(format!("foreign key names column index {ci}"))),
        }
    };
    let foreign_keys = raw
        .foreign_keys
        .iter()
        .map(|&(s, t)| {
            let (source_table, source_column) = endpoint(s)?;
            let (target_table, target_column) = endpoint(t)?;
            Ok(ForeignKey {
                source_table,
                source_column,
                target_table,
                target_column,
            })
        })
        .collect::<Result<_, StoreError>>()?;
    Ok(SchemaCatalog {
        db_id: raw.db_id,
        tables,
        foreign_keys,
    })
}

/// Loads a Spider-layout directory. A missing schema or question file is an
/// error; a missing database file yields one warning per database.
pub fn load_spider(dir: &Path) -> Result<SpiderDataset, StoreError> {
    let raw_tables: Vec<RawTables> = read_json(&dir.join("tables.json"))?;
    let raw_questions: Vec<RawQuestion> = read_json(&dir.join("dev.json"))?;
    let catalogs = raw_tables
        .into_iter()
        .map(|r| catalog_from_raw(r, &dir.join("tables.json")))
        .collect::<Result<Vec<_>, _>>()?;

    let mut ds = SpiderDataset {
        root: dir.to_path_buf(),
        catalogs,
        ..Default::default()
    };
    for c in &ds.catalogs {
        let p = dir.join("database").join(&c.db_id).join(format!("{}.sqlite", c.db_id));
        if p.is_file() {
            ds.db_paths.insert(c.db_id.clone(), p);
        }
    }

    let mut no_catalog: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut no_db: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, q) in raw_questions.into_iter().enumerate() {
        let id = i.to_string();
        if ds.catalog(&q.db_id).is_none() {
            no_catalog.entry(q.db_id.clone()).or_default().push(id.clone());
        } else if !ds.db_paths.contains_key(&q.db_id) {
            no_db.entry(q.db_id.clone()).or_default().push(id.clone());
        }
        ds.questions.push(SpiderQuestion {
            question_id: id,
            db_id: q.db_id,
            question: q.question,
            gold_sql: q.query,
        });
    }
    for (db, ids) in no_catalog {
        ds.warnings
            .push(format!("database {db} has no schema entry (questions {})", ids.join(", ")));
    }
    for (db, ids) in no_db {
        ds.warnings
            .push(format!("database file for {db} is missing (questions {})", ids.join(", ")));
    }
    Ok(ds)
}

// ------------------------------------------------------ generation records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    #[serde(default = "default_version")]
    pub version: u32,
    pub question_id: String,
    pub db_id: String,
    pub question: String,
    pub gold_sql: String,
    pub model: String,
    pub decoding: Decoding,
    pub samples: Vec<String>,
    #[serde(default)]
    pub variant_of: Option<String>,
    #[serde(default)]
    pub perturbation_kind: Option<PerturbationKind>,
}

fn default_version() -> u32 {
    RECORD_VERSION
}

impl GenerationRecord {
    pub fn to_set(&self) -> GenerationSet {
        GenerationSet {
            question_id: self.question_id.clone(),
            question: self.question.clone(),
            db_id: self.db_id.clone(),
            gold_sql: self.gold_sql.clone(),
            candidates: self.samples.clone(),
            provenance: Provenance {
                model: self.model.clone(),
                temperature: self.decoding.temperature,
                k: self.decoding.k,
            },
        }
    }
}

/// A loaded record file: base entries as sets, variants grouped into families.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerationFile {
    /// Base entries in file order.
    pub sets: Vec<GenerationSet>,
    /// One family per (model, base, kind), ordered by the base's position
    /// and then by kind.
    pub families: Vec<VariantFamily>,
}

impl GenerationFile {
    /// Models in first-appearance order.
    pub fn models(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.sets {
            if !out.contains(&s.provenance.model) {
                out.push(s.provenance.model.clone());
            }
        }
        out
    }
}

/// Reads a JSONL file; blank lines are skipped, errors carry line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| StoreError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_generations(path: &Path) -> Result<GenerationFile, StoreError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut entries: Vec<(usize, GenerationRecord)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            let rec = serde_json::from_str(&line).map_err(|e| StoreError::Line {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push((i + 1, rec));
        }
    }
    group_records(path, entries)
}

/// Builds a [`GenerationFile`] from records already in memory.
pub fn group_generation_records(records: Vec<GenerationRecord>) -> Result<GenerationFile, StoreError> {
    group_records(Path::new("<memory>"), records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
}

fn group_records(path: &Path, entries: Vec<(usize, GenerationRecord)>) -> Result<GenerationFile, StoreError> {
    let line_err = |line: usize, message: String| StoreError::Line {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (line, r) in &entries {
        if r.version != RECORD_VERSION {
            return Err(line_err(*line, format!("unsupported record version {}", r.version)));
        }
        if r.samples.len() != r.decoding.k {
            return Err(line_err(
                *line,
                format!("{} samples but decoding.k is {}", r.samples.len(), r.decoding.k),
            ));
        }
        if r.variant_of.is_some() != r.perturbation_kind.is_some() {
            return Err(line_err(*line, "variant_of and perturbation_kind must be given together".into()));
        }
        if let Some(prev) = seen.insert((r.model.clone(), r.question_id.clone()), *line) {
            return Err(line_err(
                *line,
                format!("duplicate question_id {} for model {} (first on line {prev})", r.question_id, r.model),
            ));
        }
    }

    let mut out = GenerationFile::default();
    let mut base_index: HashMap<(String, String), usize> = HashMap::new();
    for (_, r) in &entries {
        if r.variant_of.is_none() {
            base_index.insert((r.model.clone(), r.question_id.clone()), out.sets.len());
            out.sets.push(r.to_set());
        }
    }
    // (base position, kind) -> family
    let mut families: BTreeMap<(usize, PerturbationKind), VariantFamily> = BTreeMap::new();
    for (line, r) in &entries {
        let (Some(base_id), Some(kind)) = (&r.variant_of, r.perturbation_kind) else {
            continue;
        };
        let &pos = base_index
            .get(&(r.model.clone(), base_id.clone()))
            .ok_or_else(|| line_err(*line, format!("variant_of names unknown base {base_id}")))?;
        families
            .entry((pos, kind))
            .or_insert_with(|| VariantFamily {
                family_id: base_id.clone(),
                kind,
                base: out.sets[pos].clone(),
                variants: Vec::new(),
            })
            .variants
            .push(r.to_set());
    }
    out.families = families.into_values().collect();
    Ok(out)
}

/// Alternative family description: `{"base": id, "variants": [id...], "kind": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub base: String,
    pub variants: Vec<String>,
    pub kind: PerturbationKind,
}

/// Reads family specs from a JSON array file, or a single object.
pub fn load_family_specs(path: &Path) -> Result<Vec<FamilySpec>, StoreError> {
    let v: serde_json::Value = read_json(path)?;
    let parsed = if v.is_array() {
        serde_json::from_value(v)
    } else {
        serde_json::from_value(v).map(|s| vec![s])
    };
    parsed.map_err(|e| StoreError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Builds families from specs over the sets of one model.
pub fn families_from_specs(sets: &[GenerationSet], specs: &[FamilySpec]) -> Result<Vec<VariantFamily>, StoreError> {
    let find = |id: &str| {
        sets.iter()
            .find(|s| s.question_id == id)
            .cloned()
            .ok_or_else(|| StoreError::Format {
                path: PathBuf::from("<family spec>"),
                message: format!("unknown question id {id}"),
            })
    };
    specs
        .iter()
        .map(|spec| {
            Ok(VariantFamily {
                family_id: spec.base.clone(),
                kind: spec.kind,
                base: find(&spec.base)?,
                variants: spec.variants.iter().map(|v| find(v)).collect::<Result<_, _>>()?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Jsonl,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(ReportFormat::Jsonl),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected jsonl or csv)")),
        }
    }
}

/// Default number of decimals in CSV output.
pub const CSV_PRECISION: usize = 4;

/// A record type with a fixed CSV column set.
pub trait Tabular {
    const HEADERS: &'static [&'static str];
    fn cells(&self, precision: usize) -> Vec<String>;
}

pub fn fmt_f64(v: f64, precision: usize) -> String {
    format!("{v:.precision$}")
}

pub fn fmt_opt(v: Option<f64>, precision: usize) -> String {
    v.map(|v| fmt_f64(v, precision)).unwrap_or_default()
}

/// Serializes records in memory: one JSON object per line, or CSV with the
/// type's header row.
pub fn render_report<T: Serialize + Tabular>(
    records: &[T],
    format: ReportFormat,
    precision: usize,
) -> Result<Vec<u8>, String> {
    match format {
        ReportFormat::Jsonl => {
            let mut buf = Vec::new();
            for r in records {
                serde_json::to_writer(&mut buf, r).map_err(|e| e.to_string())?;
                buf.push(b'\n');
            }
            Ok(buf)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(T::HEADERS).map_err(|e| e.to_string())?;
            for r in records {
                w.write_record(r.cells(precision)).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

/// Writes bytes through a temporary file in the target directory, then
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn write_report<T: Serialize + Tabular>(
    records: &[T],
    path: &Path,
    format: ReportFormat,
    precision: usize,
) -> Result<(), StoreError> {
    let bytes = render_report(records, format, precision).map_err(|message| StoreError::Format {
        path: path.to_path_buf(),
        message,
    })?;
    write_atomic(path, &bytes)
}

// ------------------------------------------------------- header registry

impl Tabular for QuestionMetrics {
    const HEADERS: &'static [&'static str] = &[
        "question_id",
        "db_id",
        "n",
        "m",
        "k_distinct",
        "majority",
        "entropy_bits",
        "gold_fraction",
        "pairwise_sim",
        "failure_count",
        "gold_parsed",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.question_id.clone(),
            self.db_id.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.k_distinct.to_string(),
            fmt_opt(self.majority, p),
            fmt_opt(self.entropy_bits, p),
            fmt_opt(self.gold_fraction, p),
            fmt_opt(self.pairwise_sim, p),
            self.failure_count.to_string(),
            self.gold_parsed.to_string(),
        ]
    }
}

impl Tabular for StructureSummary {
    const HEADERS: &'static [&'static str] = &[
        "model",
        "questions",
        "excluded",
        "gold_unparsed",
        "distinct",
        "majority",
        "entropy",
        "gold",
        "parse_failure_rate",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.model.clone(),
            self.questions.to_string(),
            self.excluded.to_string(),
            self.gold_unparsed.to_string(),
            fmt_opt(self.distinct, p),
            fmt_opt(self.majority, p),
            fmt_opt(self.entropy, p),
            fmt_opt(self.gold, p),
            fmt_opt(self.parse_failure_rate, p),
        ]
    }
}

impl Tabular for FamilyRecord {
    const HEADERS: &'static [&'static str] =
        &["family_id", "kind", "cons_para", "sensitivity", "sensitive", "excluded", "distinct"];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.family_id.clone(),
            self.kind.as_str().to_string(),
            fmt_opt(self.cons_para, p),
            fmt_opt(self.sensitivity, p),
            self.sensitive.to_string(),
            self.excluded.to_string(),
            self.distinct.to_string(),
        ]
    }
}

impl Tabular for RobustnessSummary {
    const HEADERS: &'static [&'static str] = &[
        "model",
        "kind",
        "families",
        "excluded",
        "ast_sim",
        "distinct",
        "sensitivity",
        "sensitive_frac",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.model.clone(),
            self.kind.as_str().to_string(),
            self.families.to_string(),
            self.excluded.to_string(),
            fmt_opt(self.ast_sim, p),
            fmt_opt(self.distinct, p),
            fmt_opt(self.sensitivity, p),
            fmt_opt(self.sensitive_frac, p),
        ]
    }
}

impl Tabular for PipelineRecord {
    const HEADERS: &'static [&'static str] = &[
        "question_id",
        "fence_stripped",
        "json_valid",
        "compilable",
        "sql_parses",
        "end_to_end",
        "sql",
        "error",
    ];
    fn cells(&self, _: usize) -> Vec<String> {
        vec![
            self.question_id.clone(),
            self.fence_stripped.to_string(),
            self.json_valid.to_string(),
            self.compilable.to_string(),
            self.sql_parses.to_string(),
            self.end_to_end.to_string(),
            self.sql.clone().unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl Tabular for PipelineRates {
    const HEADERS: &'static [&'static str] = &[
        "records",
        "json_valid_rate",
        "compilable_rate",
        "sql_parse_rate",
        "end_to_end_success",
    ];
    fn cells(&self, p: usize) -> Vec<String> {
        vec![
            self.records.to_string(),
            fmt_f64(self.json_valid_rate, p),
            fmt_f64(self.compilable_rate, p),
            fmt_f64(self.sql_parse_rate, p),
            fmt_f64(self.end_to_end_rate, p),
        ]
    }
}

impl Tabular for GenerationRecord {
    const HEADERS: &'static [&'static str] = &[
        "question_id",
        "db_id",
        "model",
        "temperature",
        "k",
        "variant_of",
        "perturbation_kind",
        "samples",
    ];
    fn cells(&self, _: usize) -> Vec<String> {
        vec![
            self.question_id.clone(),
            self.db_id.clone(),
            self.model.clone(),
            self.decoding.temperature.to_string(),
            self.decoding.k.to_string(),
            self.variant_of.clone().unwrap_or_default(),
            self.perturbation_kind.map(|k| k.as_str().to_string()).unwrap_or_default(),
            serde_json::to_string(&self.samples).unwrap_or_default(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::summarize;

    fn rec(id: &str, k: usize, variant_of: Option<&str>) -> GenerationRecord {
        GenerationRecord {
            version: 1,
            question_id: id.into(),
            db_id: "concert_singer".into(),
            question: format!("question {id}"),
            gold_sql: "SELECT count(*) FROM singer".into(),
            model: "m".into(),
            decoding: Decoding { temperature: 1.0, k },
            samples: vec!["SELECT count(*) FROM singer".into(); k],
            variant_of: variant_of.map(String::from),
            perturbation_kind: variant_of.map(|_| PerturbationKind::Paraphrase),
        }
    }

    fn write_lines(dir: &Path, lines: &[String]) -> PathBuf {
        let p = dir.join("records.jsonl");
        fs::write(&p, lines.join("\n")).unwrap();
        p
    }

    fn line(r: &GenerationRecord) -> String {
        serde_json::to_string(r).unwrap()
    }

    #[test]
    fn family_grouping() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_lines(
            dir.path(),
            &[line(&rec("0", 3, None)), line(&rec("0-p1", 3, Some("0"))), line(&rec("0-p2", 3, Some("0")))],
        );
        let f = load_generations(&p).unwrap();
        assert_eq!(f.sets.len(), 1);
        assert_eq!(f.families.len(), 1);
        assert_eq!(f.families[0].variants.len(), 2);
        assert_eq!(f.families[0].family_id, "0");
    }

    #[test]
    fn sample_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = rec("0", 10, None);
        r.samples.pop();
        let p = write_lines(dir.path(), &[line(&rec("1", 10, None)), line(&r)]);
        match load_generations(&p) {
            Err(StoreError::Line { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("9 samples"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_and_dangling() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_lines(dir.path(), &[line(&rec("0", 1, None)), "{oops".into()]);
        assert!(matches!(load_generations(&p), Err(StoreError::Line { line: 2, .. })));
        let p = write_lines(dir.path(), &[line(&rec("0", 1, None)), line(&rec("1-p", 1, Some("9")))]);
        assert!(matches!(load_generations(&p), Err(StoreError::Line { line: 2, .. })));
    }

    #[test]
    fn ten_questions() {
        let dir = tempfile::tempdir().unwrap();
        let lines: Vec<_> = (0..10).map(|i| line(&rec(&i.to_string(), 2, None))).collect();
        let f = load_generations(&write_lines(dir.path(), &lines)).unwrap();
        assert_eq!(f.sets.len(), 10);
        assert!(f.families.is_empty());
        assert_eq!(f.models(), ["m"]);
    }

    #[test]
    fn header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t1.csv");
        write_report::<StructureSummary>(&[], &p, ReportFormat::Csv, CSV_PRECISION).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "model,questions,excluded,gold_unparsed,distinct,majority,entropy,gold,parse_failure_rate\n"
        );
    }

    #[test]
    fn seven_model_csv() {
        let rows: Vec<_> = (0..7).map(|i| summarize(&format!("model-{i}"), &[])).collect();
        let bytes = render_report(&rows, ReportFormat::Csv, 4).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap().lines().count(), 8);
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.jsonl");
        let records = vec![rec("0", 2, None), rec("0-p", 2, Some("0"))];
        write_report(&records, &p, ReportFormat::Jsonl, 4).unwrap();
        assert_eq!(read_jsonl::<GenerationRecord>(&p).unwrap(), records);

        let m = crate::metrics::question_metrics(&records[0].to_set(), Default::default());
        let p = dir.path().join("m.jsonl");
        write_report(std::slice::from_ref(&m), &p, ReportFormat::Jsonl, 4).unwrap();
        assert_eq!(read_jsonl::<QuestionMetrics>(&p).unwrap(), vec![m]);
    }

    #[test]
    fn unwritable_path() {
        let r = write_report::<StructureSummary>(&[], Path::new("/nonexistent/dir/x.csv"), ReportFormat::Csv, 4);
        assert!(matches!(r, Err(StoreError::Io { .. })));
    }

    #[test]
    fn empty_dir_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_spider(dir.path()), Err(StoreError::Missing(_))));
    }

    #[test]
    fn spider_layout() {
        let dir = tempfile::tempdir().unwrap();
        let tables = serde_json::json!([
            {"db_id": "a", "table_names_original": ["t", "u"],
             "column_names_original": [[-1, "*"], [0, "id"], [0, "x"], [1, "tid"]],
             "foreign_keys": [[3, 1]]},
            {"db_id": "b", "table_names_original": ["v"], "column_names_original": [[-1, "*"], [0, "y"]]}
        ]);
        let dev = serde_json::json!([
            {"db_id": "a", "question": "q0", "query": "SELECT x FROM t"},
            {"db_id": "b", "question": "q1", "query": "SELECT y FROM v"},
            {"db_id": "b", "question": "q2", "query": "SELECT count(*) FROM v"}
        ]);
        fs::write(dir.path().join("tables.json"), tables.to_string()).unwrap();
        fs::write(dir.path().join("dev.json"), dev.to_string()).unwrap();
        fs::create_dir_all(dir.path().join("database/a")).unwrap();
        fs::write(dir.path().join("database/a/a.sqlite"), b"").unwrap();

        let ds = load_spider(dir.path()).unwrap();
        assert_eq!(ds.questions.len(), 3);
        assert_eq!(ds.questions[2].question_id, "2");
        assert_eq!(ds.catalogs.len(), 2);
        assert_eq!(ds.catalog("a").unwrap().foreign_keys[0].source_column, "tid");
        assert_eq!(ds.catalog("a").unwrap().tables[0].columns, ["id", "x"]);
        assert_eq!(ds.warnings.len(), 1);
        assert!(ds.warnings[0].contains("questions 1, 2"));
        assert!(ds.db_path("a").is_some() && ds.db_path("b").is_none());
    }
}
