use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sqlshape_testkit::{build_spider_fixture, synthetic_records, write_records};
use tempfile::TempDir;

fn sqlshape(args: &[&str], stdin: Option<&str>) -> Output {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_sqlshape"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn setup(families: usize) -> (TempDir, String, String) {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("spider");
    build_spider_fixture(&ds).unwrap();
    let rec = tmp.path().join("records.jsonl");
    let mut records = synthetic_records("model-a", 10, 1, families);
    records.extend(synthetic_records("model-b", 10, 2, families));
    write_records(&rec, &records).unwrap();
    let (ds, rec) = (ds.display().to_string(), rec.display().to_string());
    (tmp, ds, rec)
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn canonicalize_stdin() {
    let o = sqlshape(
        &["canonicalize"],
        Some("SELECT a FROM t AS x WHERE x.b = 1 AND x.c = 2\n\nselect a from t as y where y.c = 2 and y.b = 1\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], lines[1]);

    let o = sqlshape(&["canonicalize"], Some("SELECT 1\nSELECT FROM WHERE\n"));
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().nth(1).unwrap().starts_with("PARSE_FAIL\t"));

    let o = sqlshape(&["canonicalize"], Some(""));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn canonicalize_missing_file() {
    let o = sqlshape(&["canonicalize", "/nonexistent/queries.sql"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metrics_outputs() {
    let (tmp, ds, rec) = setup(0);
    let out = tmp.path().join("m");
    let o = sqlshape(
        &["metrics", "--records", &rec, "--dataset", &ds, "--out", out.to_str().unwrap(), "--seed", "7"],
        None,
    );
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("structure_summary.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,questions,excluded,gold_unparsed,distinct,majority,entropy,gold,parse_failure_rate"
    );
    assert!(lines.next().unwrap().starts_with("model-a,50,"));
    assert!(lines.next().unwrap().starts_with("model-b,50,"));
    assert_eq!(read(&out.join("question_metrics.jsonl")).lines().count(), 100);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("run.json"))).unwrap();
    assert_eq!(manifest["command"], "metrics");
    assert_eq!(manifest["settings"]["seed"], 7);
    assert!(manifest["settings"].get("workers").is_none());
}

#[test]
fn exec_outputs() {
    let (tmp, ds, rec) = setup(0);
    let out = tmp.path().join("e");
    let o = sqlshape(
        &["exec", "--records", &rec, "--dataset", &ds, "--out", out.to_str().unwrap(), "--workers", "3"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("exec_summary.csv"));
    assert!(csv.lines().next().unwrap().starts_with("model,exec_acc,success_rate"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(read(&out.join("exec_reports.jsonl")).lines().count(), 100);
    assert_eq!(read(&out.join("exec_failures.jsonl")), "");
}

#[test]
fn exec_requires_dataset() {
    let (tmp, _ds, rec) = setup(0);
    let out = tmp.path().join("e");
    let o = sqlshape(&["exec", "--records", &rec, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dataset"));
}

#[test]
fn robustness_outputs() {
    let (tmp, _ds, rec) = setup(5);
    let out = tmp.path().join("r");
    let o = sqlshape(&["robustness", "--records", &rec, "--out", out.to_str().unwrap()], None);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out.join("family_records.jsonl")).lines().count(), 10);
    let csv = read(&out.join("robustness_summary.csv"));
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("model-a,paraphrase,5,"));

    let (tmp, _ds, rec) = setup(0);
    let o = sqlshape(
        &["robustness", "--records", &rec, "--out", tmp.path().join("r").to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn robustness_from_spec_file() {
    let (tmp, _ds, rec) = setup(0);
    let spec = tmp.path().join("families.jsonl");
    fs::write(
        &spec,
        "{\"base\":\"5\",\"variants\":[\"6\"],\"kind\":\"paraphrase\"}\n",
    )
    .unwrap();
    let out = tmp.path().join("r");
    let o = sqlshape(
        &["robustness", "--records", &rec, "--families", spec.to_str().unwrap(), "--out", out.to_str().unwrap()],
        None,
    );
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out.join("family_records.jsonl")).lines().count(), 2);
}

#[test]
fn compile_ir_lines() {
    let (tmp, ds, _rec) = setup(0);
    let input = tmp.path().join("ir.jsonl");
    let stadium = r#"{"type":"query","query":{"select":[{"expr":{"col":["stadium","Name"]}}],"from":{"table":"stadium"},"limit":1}}"#;
    let lines = [
        serde_json::json!({"question_id": "a", "db_id": "concert_singer", "raw": stadium}),
        serde_json::json!({"question_id": "b", "db_id": "concert_singer", "raw": "not json"}),
        serde_json::json!({"question_id": "c", "db_id": "concert_singer",
            "raw": r#"{"type":"query","query":{"select":[{"expr":{"col":["nope","x"]}}],"from":{"table":"nope"}}}"#}),
    ];
    fs::write(&input, lines.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let out = tmp.path().join("c");
    let o = sqlshape(
        &["compile", "--records", input.to_str().unwrap(), "--dataset", &ds, "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sql = read(&out.join("compiled.sql"));
    assert!(sql.starts_with("SELECT stadium.Name FROM stadium LIMIT 1;\n"));
    assert!(sql.contains("-- b: "));
    let rates = read(&out.join("pipeline_rates.csv"));
    assert_eq!(
        rates,
        "records,json_valid_rate,compilable_rate,sql_parse_rate,end_to_end_success\n3,0.6667,0.6667,0.6667,0.3333\n"
    );
}

#[test]
fn compile_ingest_flagged_records() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flags.jsonl");
    let mut text = String::new();
    for i in 0..4 {
        let r = serde_json::json!({
            "question_id": i.to_string(), "raw": "", "fence_stripped": false,
            "json_valid": true, "compilable": i != 0, "sql_parses": i > 1, "end_to_end": i > 0,
            "sql": null, "error": null
        });
        text.push_str(&format!("{r}\n"));
    }
    fs::write(&input, text).unwrap();
    let out = tmp.path().join("c");
    let o = sqlshape(
        &["compile", "--ingest", "--records", input.to_str().unwrap(), "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read(&out.join("pipeline_rates.csv")),
        "records,json_valid_rate,compilable_rate,sql_parse_rate,end_to_end_success\n4,1.0000,0.7500,0.5000,0.7500\n"
    );
}

#[test]
fn generate_needs_provider_file() {
    let (tmp, ds, _rec) = setup(0);
    let o = sqlshape(
        &[
            "generate",
            "--dataset",
            &ds,
            "--provider",
            tmp.path().join("none.json").to_str().unwrap(),
            "--out",
            tmp.path().join("g.jsonl").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_is_usage_error() {
    let o = sqlshape(&["metrics", "--bogus"], None);
    assert_eq!(o.status.code(), Some(2));
}
