//! `sqlshape` subcommands. Each command reads recorded inputs, fans work
//! out over a worker pool, and writes outputs in input order so results do
//! not depend on the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sqlshape_core::canon::{canonical_key, extract_sql};
use sqlshape_core::ir::{pipeline_metrics, process_output, PipelineRecord};
use sqlshape_core::metrics::{question_metrics, summarize, GenerationMode, GenerationSet};
use sqlshape_core::robustness::{evaluate_family, shuffle_schema, summarize_families, PerturbationKind, VariantFamily};
use sqlshape_core::sql::Dialect;
use sqlshape_core::store::{
    families_from_specs, load_family_specs, load_generations, load_spider, read_jsonl, render_report, write_atomic,
    GenerationRecord, ReportFormat, SpiderDataset, Tabular,
};
use sqlshape_exec::{evaluate_generation_set, summarize_exec, ExecReport, Executor, Thresholds};
use sqlshape_gen::{generate_record, PromptTemplate, ProviderConfig};

#[derive(Debug, Parser)]
#[command(name = "sqlshape", version, about = "Structural consistency analysis for generated SQL")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print one structure key (or PARSE_FAIL) per input line.
    Canonicalize(CanonArgs),
    /// Per-question structure statistics and per-model means.
    Metrics(RunArgs),
    /// Execute candidates against the dataset databases.
    Exec(RunArgs),
    /// Agreement and sensitivity over variant families.
    Robustness(RunArgs),
    /// Validate and compile JSON query outputs; report validity rates.
    Compile(CompileArgs),
    /// Sample generations from a chat-completion endpoint.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Compile,
}

impl From<Mode> for GenerationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Direct => GenerationMode::Direct,
            Mode::Compile => GenerationMode::Compile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Jsonl => ReportFormat::Jsonl,
        }
    }
}

#[derive(Debug, Args)]
pub struct CanonArgs {
    /// Input file, one query per line; stdin when absent or `-`.
    pub input: Option<PathBuf>,
    /// Print `{"key", "digest"}` objects instead of bare keys.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Generation-record JSONL file.
    #[arg(long)]
    pub records: PathBuf,
    /// Spider-layout dataset directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Output directory.
    #[serde(skip)]
    #[arg(long)]
    pub out: PathBuf,
    /// Format of the summary table.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "timeout-ms", default_value_t = 30_000)]
    pub timeout_ms: u64,
    #[arg(long = "acc-threshold", default_value_t = 0.8)]
    pub acc_threshold: f64,
    #[arg(long = "struct-threshold", default_value_t = 0.5)]
    pub struct_threshold: f64,
    /// Decimals in CSV output.
    #[arg(long, default_value_t = 4)]
    pub precision: usize,
    /// Worker threads; 0 picks the number of CPUs.
    #[serde(skip)]
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Variant family spec file (robustness only).
    #[arg(long)]
    pub families: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompileArgs {
    /// JSONL of `{question_id, raw, db_id?}` lines or generation records.
    #[arg(long)]
    pub records: PathBuf,
    /// When given, compiled SQL is executed to decide end-to-end success.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Records are already-flagged pipeline records; only compute rates.
    #[arg(long)]
    pub ingest: bool,
    #[arg(long = "timeout-ms", default_value_t = 30_000)]
    pub timeout_ms: u64,
    #[arg(long, default_value_t = 4)]
    pub precision: usize,
    #[serde(skip)]
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Provider configuration JSON.
    #[arg(long)]
    pub provider: PathBuf,
    /// Output record file (JSONL).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: Mode,
    /// Seed for schema shuffles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra schema-order variants per question.
    #[arg(long = "schema-variants", default_value_t = 0)]
    pub schema_variants: usize,
    /// Only the first N questions.
    #[arg(long)]
    pub limit: Option<usize>,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// Finished, but some questions were flagged.
    Partial = 1,
    /// Usage or I/O problem.
    Failed = 2,
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CmdResult = Result<Exit, CliError>;

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Exit {
    let r = match cli.command {
        Command::Canonicalize(a) => cmd_canonicalize(&a, stdout),
        Command::Metrics(a) => cmd_metrics(&a, stdout),
        Command::Exec(a) => cmd_exec(&a, stdout),
        Command::Robustness(a) => cmd_robustness(&a, stdout),
        Command::Compile(a) => cmd_compile(&a, stdout),
        Command::Generate(a) => cmd_generate(&a, stdout),
    };
    match r {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            Exit::Failed
        }
    }
}

// ------------------------------------------------------------- helpers

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

fn require_file(p: &Path, what: &str) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError(format!("{what} {} is not a readable file", p.display())))
    }
}

fn prepare_out_dir(p: &Path) -> Result<(), CliError> {
    fs::create_dir_all(p).map_err(|e| CliError(format!("cannot create {}: {e}", p.display())))
}

fn load_dataset(dir: &Option<PathBuf>, required: bool) -> Result<Option<SpiderDataset>, CliError> {
    match dir {
        None if required => Err(CliError("--dataset is required".into())),
        None => Ok(None),
        Some(d) => {
            let ds = load_spider(d)?;
            for w in &ds.warnings {
                eprintln!("warning: {w}");
            }
            Ok(Some(ds))
        }
    }
}

/// A per-question record tagged with its model.
#[derive(Serialize)]
struct WithModel<'a, T> {
    model: &'a str,
    #[serde(flatten)]
    record: &'a T,
}

fn jsonl<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, &r)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

fn write_summary<T: Serialize + Tabular>(
    dir: &Path,
    stem: &str,
    rows: &[T],
    format: Format,
    precision: usize,
) -> Result<PathBuf, CliError> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    };
    let path = dir.join(format!("{stem}.{ext}"));
    write_atomic(&path, &render_report(rows, format.into(), precision)?)?;
    Ok(path)
}

/// Writes the settings of a run next to its outputs.
fn write_manifest<T: Serialize>(dir: &Path, command: &str, args: &T) -> Result<(), CliError> {
    let v = serde_json::json!({ "command": command, "settings": args });
    write_atomic(&dir.join("run.json"), serde_json::to_string_pretty(&v)?.as_bytes())?;
    Ok(())
}

/// Sets grouped by model, models in first-appearance order.
fn by_model<T>(items: &[T], model: impl Fn(&T) -> &str) -> Vec<(String, Vec<&T>)> {
    let mut order: Vec<(String, Vec<&T>)> = Vec::new();
    for it in items {
        let m = model(it);
        match order.iter_mut().find(|(name, _)| name == m) {
            Some((_, v)) => v.push(it),
            None => order.push((m.to_string(), vec![it])),
        }
    }
    order
}

// ----------------------------------------------------------- commands

pub fn cmd_canonicalize(a: &CanonArgs, out: &mut dyn Write) -> CmdResult {
    let text = match &a.input {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| CliError(format!("cannot read {}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            for line in io::stdin().lock().lines() {
                s.push_str(&line?);
                s.push('\n');
            }
            s
        }
    };
    let mut all_ok = true;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match canonical_key(&extract_sql(line), Dialect::Sqlite) {
            Ok(k) if a.json => writeln!(out, "{}", serde_json::to_string(&k)?)?,
            Ok(k) => writeln!(out, "{}", k.key)?,
            Err(e) => {
                all_ok = false;
                writeln!(out, "PARSE_FAIL\t{e}")?;
            }
        }
    }
    Ok(if all_ok { Exit::Ok } else { Exit::Partial })
}

pub fn cmd_metrics(a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    require_file(&a.records, "records file")?;
    load_dataset(&a.dataset, false)?;
    prepare_out_dir(&a.out)?;
    let file = load_generations(&a.records)?;
    let mode: GenerationMode = a.mode.into();
    let rows: Vec<_> = pool(a.workers)?.install(|| file.sets.par_iter().map(|s| question_metrics(s, mode)).collect());

    let paired: Vec<(&GenerationSet, _)> = file.sets.iter().zip(&rows).collect();
    let mut summaries = Vec::new();
    for (model, group) in by_model(&paired, |(s, _)| &s.provenance.model) {
        let model_rows: Vec<_> = group.iter().map(|(_, r)| (*r).clone()).collect();
        summaries.push(summarize(&model, &model_rows));
    }
    write_atomic(
        &a.out.join("question_metrics.jsonl"),
        &jsonl(paired.iter().map(|(s, r)| WithModel {
            model: &s.provenance.model,
            record: *r,
        }))?,
    )?;
    let path = write_summary(&a.out, "structure_summary", &summaries, a.format, a.precision)?;
    write_manifest(&a.out, "metrics", a)?;

    let flagged = rows.iter().filter(|r| r.m == 0 || !r.gold_parsed).count();
    writeln!(out, "{} questions, {} models -> {}", rows.len(), summaries.len(), path.display())?;
    if flagged > 0 {
        writeln!(out, "{flagged} questions flagged (no parsed generation or unparseable gold)")?;
        return Ok(Exit::Partial);
    }
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct ExecFailure<'a> {
    model: &'a str,
    question_id: &'a str,
    message: String,
}

pub fn cmd_exec(a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    require_file(&a.records, "records file")?;
    let ds = load_dataset(&a.dataset, true)?.expect("required");
    prepare_out_dir(&a.out)?;
    let file = load_generations(&a.records)?;
    let mode: GenerationMode = a.mode.into();
    let timeout = Duration::from_millis(a.timeout_ms);
    let thresholds = Thresholds {
        acc: a.acc_threshold,
        structure: a.struct_threshold,
    };

    let results: Vec<Result<ExecReport, String>> = pool(a.workers)?.install(|| {
        file.sets
            .par_iter()
            .map_init(
                || Executor::new(timeout),
                |ex, s| match ds.db_path(&s.db_id) {
                    None => Err(format!("database file for {} is missing", s.db_id)),
                    Some(db) => evaluate_generation_set(s, db, mode, ex).map_err(|e| e.to_string()),
                },
            )
            .collect()
    });

    let paired: Vec<(&GenerationSet, &Result<ExecReport, String>)> = file.sets.iter().zip(&results).collect();
    let mut summaries = Vec::new();
    for (model, group) in by_model(&paired, |(s, _)| &s.provenance.model) {
        let reports: Vec<ExecReport> = group.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect();
        let failed = group.len() - reports.len();
        summaries.push(summarize_exec(&model, &reports, failed, thresholds));
    }
    write_atomic(
        &a.out.join("exec_reports.jsonl"),
        &jsonl(paired.iter().filter_map(|(s, r)| {
            r.as_ref().ok().map(|record| WithModel {
                model: &s.provenance.model,
                record,
            })
        }))?,
    )?;
    let failures: Vec<_> = paired
        .iter()
        .filter_map(|(s, r)| {
            r.as_ref().err().map(|m| ExecFailure {
                model: &s.provenance.model,
                question_id: &s.question_id,
                message: m.clone(),
            })
        })
        .collect();
    write_atomic(&a.out.join("exec_failures.jsonl"), &jsonl(&failures)?)?;
    let path = write_summary(&a.out, "exec_summary", &summaries, a.format, a.precision)?;
    write_manifest(&a.out, "exec", a)?;

    writeln!(out, "{} questions, {} models -> {}", results.len(), summaries.len(), path.display())?;
    if !failures.is_empty() {
        writeln!(out, "{} questions excluded: gold did not execute", failures.len())?;
        return Ok(Exit::Partial);
    }
    Ok(Exit::Ok)
}

pub fn cmd_robustness(a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    require_file(&a.records, "records file")?;
    if let Some(f) = &a.families {
        require_file(f, "family spec")?;
    }
    prepare_out_dir(&a.out)?;
    let file = load_generations(&a.records)?;
    let mut families: Vec<VariantFamily> = file.families.clone();
    if let Some(f) = &a.families {
        let specs = load_family_specs(f)?;
        for (_, sets) in by_model(&file.sets, |s| &s.provenance.model) {
            let owned: Vec<GenerationSet> = sets.into_iter().cloned().collect();
            families.extend(families_from_specs(&owned, &specs)?);
        }
    }
    if families.is_empty() {
        return Err(CliError("no-data: the records contain no variant families".into()));
    }
    let mode: GenerationMode = a.mode.into();
    let records: Vec<_> = pool(a.workers)?.install(|| families.par_iter().map(|f| evaluate_family(f, mode)).collect());

    let paired: Vec<_> = families.iter().zip(&records).collect();
    let mut groups: BTreeMap<(usize, PerturbationKind), (String, Vec<_>)> = BTreeMap::new();
    let models = by_model(&families, |f| &f.base.provenance.model);
    for (f, r) in &paired {
        let m = &f.base.provenance.model;
        let mi = models.iter().position(|(name, _)| name == m).expect("model listed");
        groups
            .entry((mi, f.kind))
            .or_insert_with(|| (m.clone(), Vec::new()))
            .1
            .push((*r).clone());
    }
    let summaries: Vec<_> = groups
        .into_iter()
        .map(|((_, kind), (model, recs))| summarize_families(&model, kind, &recs))
        .collect();

    write_atomic(
        &a.out.join("family_records.jsonl"),
        &jsonl(paired.iter().map(|(f, r)| WithModel {
            model: &f.base.provenance.model,
            record: *r,
        }))?,
    )?;
    let path = write_summary(&a.out, "robustness_summary", &summaries, a.format, a.precision)?;
    write_manifest(&a.out, "robustness", a)?;

    let excluded = records.iter().filter(|r| r.excluded).count();
    writeln!(out, "{} families -> {}", records.len(), path.display())?;
    if excluded > 0 {
        writeln!(out, "{excluded} families excluded (a member had no parsed generation)")?;
        return Ok(Exit::Partial);
    }
    Ok(Exit::Ok)
}

#[derive(Deserialize)]
struct IrLine {
    question_id: String,
    #[serde(default)]
    db_id: Option<String>,
    raw: String,
}

/// Compile inputs flattened to `(question_id, db_id, raw)`.
fn compile_inputs(path: &Path) -> Result<Vec<(String, Option<String>, String)>, CliError> {
    let values: Vec<serde_json::Value> = read_jsonl(path)?;
    let mut out = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        let bad = |e: serde_json::Error| CliError(format!("{}: record {}: {e}", path.display(), i + 1));
        if v.get("samples").is_some() {
            let r: GenerationRecord = serde_json::from_value(v).map_err(bad)?;
            for (j, s) in r.samples.iter().enumerate() {
                out.push((format!("{}/{j}", r.question_id), Some(r.db_id.clone()), s.clone()));
            }
        } else {
            let l: IrLine = serde_json::from_value(v).map_err(bad)?;
            out.push((l.question_id, l.db_id, l.raw));
        }
    }
    Ok(out)
}

pub fn cmd_compile(a: &CompileArgs, out: &mut dyn Write) -> CmdResult {
    require_file(&a.records, "records file")?;
    let ds = if a.ingest { None } else { load_dataset(&a.dataset, false)? };
    prepare_out_dir(&a.out)?;

    let records: Vec<PipelineRecord> = if a.ingest {
        read_jsonl(&a.records)?
    } else {
        let inputs = compile_inputs(&a.records)?;
        let timeout = Duration::from_millis(a.timeout_ms);
        pool(a.workers)?.install(|| {
            inputs
                .par_iter()
                .map_init(
                    || Executor::new(timeout),
                    |ex, (qid, db_id, raw)| {
                        let mut r = process_output(qid, raw);
                        if let (Some(ds), Some(sql)) = (&ds, &r.sql) {
                            let ok = db_id
                                .as_deref()
                                .and_then(|d| ds.db_path(d))
                                .is_some_and(|db| ex.execute(db, sql).is_ok());
                            r.set_executed(ok);
                        }
                        r
                    },
                )
                .collect()
        })
    };
    let rates = pipeline_metrics(&records).map_err(|e| CliError(format!("no-data: {e}")))?;

    if !a.ingest {
        write_atomic(&a.out.join("pipeline_records.jsonl"), &jsonl(&records)?)?;
        let mut sql = String::new();
        for r in &records {
            match &r.sql {
                Some(s) => sql.push_str(&format!("{s};\n")),
                None => sql.push_str(&format!("-- {}: {}\n", r.question_id, r.error.as_deref().unwrap_or("failed"))),
            }
        }
        write_atomic(&a.out.join("compiled.sql"), sql.as_bytes())?;
    }
    let path = write_summary(&a.out, "pipeline_rates", &[rates], a.format, a.precision)?;
    write_manifest(&a.out, "compile", a)?;
    writeln!(
        out,
        "{} records: json_valid {} compilable {} sql_parse {} end_to_end {} -> {}",
        rates.records,
        rates.json_valid_rate,
        rates.compilable_rate,
        rates.sql_parse_rate,
        rates.end_to_end_rate,
        path.display()
    )?;
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct GenFailure<'a> {
    question_id: &'a str,
    message: String,
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> CmdResult {
    require_file(&a.provider, "provider config")?;
    if a.k == 0 {
        return Err(CliError("--k must be at least 1".into()));
    }
    let ds = load_spider(&a.dataset)?;
    for w in &ds.warnings {
        eprintln!("warning: {w}");
    }
    let cfg: ProviderConfig = serde_json::from_str(&fs::read_to_string(&a.provider)?)?;
    let template = PromptTemplate::for_mode(GenerationMode::from(a.mode).into());
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_out_dir(parent)?;
    }
    let mut sink = io::BufWriter::new(fs::File::create(&a.out)?);
    let mut failures = Vec::new();
    let mut written = 0usize;
    let questions = &ds.questions[..a.limit.unwrap_or(ds.questions.len()).min(ds.questions.len())];
    for (qi, q) in questions.iter().enumerate() {
        let Some(catalog) = ds.catalog(&q.db_id) else {
            failures.push(GenFailure {
                question_id: &q.question_id,
                message: "no schema".into(),
            });
            continue;
        };
        let mut jobs = vec![(q.question_id.clone(), catalog.clone(), None)];
        for v in 1..=a.schema_variants {
            let seed = a.seed ^ ((qi as u64) << 20) ^ v as u64;
            jobs.push((format!("{}-s{v}", q.question_id), shuffle_schema(catalog, seed), Some(q.question_id.clone())));
        }
        for (id, schema, variant_of) in jobs {
            match generate_record(&cfg, &template, q, &schema, a.k, a.temperature) {
                Ok(mut r) => {
                    r.question_id = id;
                    r.perturbation_kind = variant_of.as_ref().map(|_| PerturbationKind::SchemaPresentation);
                    r.variant_of = variant_of;
                    serde_json::to_writer(&mut sink, &r)?;
                    sink.write_all(b"\n")?;
                    sink.flush()?;
                    written += 1;
                }
                Err(e) if e.is_fatal() => return Err(CliError(e.to_string())),
                Err(e) => failures.push(GenFailure {
                    question_id: &q.question_id,
                    message: format!("{id}: {e}"),
                }),
            }
        }
    }
    sink.flush()?;
    let err_path = a.out.with_extension("errors.jsonl");
    write_atomic(&err_path, &jsonl(&failures)?)?;
    writeln!(out, "{written} records -> {}", a.out.display())?;
    if !failures.is_empty() {
        writeln!(out, "{} generations failed, see {}", failures.len(), err_path.display())?;
        return Ok(Exit::Partial);
    }
    Ok(Exit::Ok)
}
