use proptest::collection::vec;
use proptest::prelude::*;
use sqlshape_core::ir::PipelineRecord;
use sqlshape_core::metrics::QuestionMetrics;
use sqlshape_core::robustness::PerturbationKind;
use sqlshape_core::store::*;
use tempfile::TempDir;

fn text() -> impl Strategy<Value = String> {
    "\\PC{0,24}"
}

fn record() -> impl Strategy<Value = GenerationRecord> {
    (
        ("[0-9]{1,3}", "[a-z_]{1,8}", text(), text(), "[a-z0-9-]{1,10}"),
        (0.0f64..2.0, vec(text(), 1..5)),
        proptest::option::of(prop_oneof![Just(PerturbationKind::Paraphrase), Just(PerturbationKind::SchemaPresentation)]),
    )
        .prop_map(|((qid, db, question, gold, model), (temperature, samples), kind)| GenerationRecord {
            version: RECORD_VERSION,
            variant_of: kind.map(|_| format!("base-{qid}")),
            question_id: qid,
            db_id: db,
            question,
            gold_sql: gold,
            model,
            decoding: Decoding {
                temperature,
                k: samples.len(),
            },
            samples,
            perturbation_kind: kind,
        })
}

fn opt_f64() -> impl Strategy<Value = Option<f64>> {
    proptest::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite()))
}

fn question_metrics() -> impl Strategy<Value = QuestionMetrics> {
    ("[0-9]{1,4}", 0usize..20, 0usize..20, opt_f64(), opt_f64(), opt_f64(), opt_f64(), any::<bool>()).prop_map(
        |(qid, n, m, majority, entropy_bits, gold_fraction, pairwise_sim, gold_parsed)| QuestionMetrics {
            question_id: qid,
            db_id: "d".into(),
            n,
            m,
            k_distinct: m.min(3),
            majority,
            entropy_bits,
            gold_fraction,
            pairwise_sim,
            failure_count: n.saturating_sub(m),
            gold_parsed,
        },
    )
}

fn pipeline_record() -> impl Strategy<Value = PipelineRecord> {
    ("[0-9]{1,4}", text(), any::<[bool; 5]>(), proptest::option::of(text()), proptest::option::of(text())).prop_map(
        |(qid, raw, f, sql, error)| PipelineRecord {
            question_id: qid,
            raw,
            fence_stripped: f[0],
            json_valid: f[1],
            compilable: f[2],
            sql_parses: f[3],
            end_to_end: f[4],
            sql,
            error,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generation_records_round_trip(records in vec(record(), 1..6)) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("r.jsonl");
        write_report_lines(&path, &records);
        let back: Vec<GenerationRecord> = read_jsonl(&path).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn question_metrics_round_trip(rows in vec(question_metrics(), 0..6)) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("q.jsonl");
        write_report(&rows, &path, ReportFormat::Jsonl, 4).unwrap();
        let back: Vec<QuestionMetrics> = read_jsonl(&path).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn pipeline_records_round_trip(rows in vec(pipeline_record(), 0..6)) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("p.jsonl");
        write_report(&rows, &path, ReportFormat::Jsonl, 4).unwrap();
        let back: Vec<PipelineRecord> = read_jsonl(&path).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn csv_columns_match_headers(rows in vec(question_metrics(), 1..6), precision in 0usize..8) {
        let bytes = render_report(&rows, ReportFormat::Csv, precision).unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let headers: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        prop_assert_eq!(headers, QuestionMetrics::HEADERS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        let mut n = 0;
        for rec in r.records() {
            prop_assert_eq!(rec.unwrap().len(), QuestionMetrics::HEADERS.len());
            n += 1;
        }
        prop_assert_eq!(n, rows.len());
    }
}

fn write_report_lines(path: &std::path::Path, records: &[GenerationRecord]) {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).unwrap());
        text.push('\n');
    }
    write_atomic(path, text.as_bytes()).unwrap();
}
