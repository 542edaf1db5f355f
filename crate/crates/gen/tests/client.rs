use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use sqlshape_core::schema::{SchemaCatalog, TableSchema};
use sqlshape_core::store::SpiderQuestion;
use sqlshape_gen::*;

/// Scripted HTTP server: answers request i with `script[min(i, len-1)]`.
struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<(String, String)>>>,
}

fn ok_body(content: &str, n: usize) -> String {
    let choices: Vec<_> = (0..n)
        .map(|i| serde_json::json!({"index": i, "message": {"role": "assistant", "content": content}}))
        .collect();
    serde_json::json!({ "choices": choices }).to_string()
}

fn stub(script: Vec<(u16, String)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let seen = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = String::new();
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push_str(&line);
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let i = {
                let mut s = seen.lock().unwrap();
                s.push((headers, String::from_utf8(body).unwrap()));
                s.len() - 1
            };
            let (code, body) = &script[i.min(script.len() - 1)];
            let resp = format!(
                "HTTP/1.1 {code} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    Stub { url, requests }
}

fn cfg(url: &str) -> ProviderConfig {
    let mut c = ProviderConfig::new(url, "stub-model");
    c.backoff_base_ms = 1;
    c.requests_per_minute = 0;
    c.max_retries = 3;
    c
}

#[test]
fn echo_stub_gives_k_identical() {
    let s = stub(vec![(200, ok_body("SELECT 1", 1))]);
    let out = sample_generations(&cfg(&s.url), "prompt", 10, 1.0).unwrap();
    assert_eq!(out.len(), 10);
    assert!(out.iter().all(|x| x.text == "SELECT 1" && x.retries == 0));
    assert_eq!(out.iter().map(|x| x.request).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
    let reqs = s.requests.lock().unwrap();
    assert_eq!(reqs.len(), 10);
    let body: serde_json::Value = serde_json::from_str(&reqs[0].1).unwrap();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["messages"][0]["content"], "prompt");
    assert!(body.get("top_p").is_none());
}

#[test]
fn rate_limited_twice_then_ok() {
    let s = stub(vec![
        (429, "{}".into()),
        (429, "{}".into()),
        (200, ok_body("SELECT 2", 1)),
    ]);
    let mut c = cfg(&s.url);
    c.max_in_flight = 1;
    let out = sample_generations(&c, "p", 1, 0.7).unwrap();
    assert_eq!(out[0].text, "SELECT 2");
    assert_eq!(out[0].retries, 2);
}

#[test]
fn server_errors_exhaust_retries() {
    let s = stub(vec![(500, "{}".into())]);
    let mut c = cfg(&s.url);
    c.max_in_flight = 1;
    let e = sample_generations(&c, "p", 2, 1.0).unwrap_err();
    assert_eq!(
        e,
        GenError::RetriesExhausted {
            retries: 3,
            last: "HTTP 500".into()
        }
    );
    assert!(!e.is_fatal());
}

#[test]
fn auth_failure_is_fatal() {
    let s = stub(vec![(401, "{}".into())]);
    let e = sample_generations(&cfg(&s.url), "p", 3, 1.0).unwrap_err();
    assert_eq!(e, GenError::Auth(401));
    assert!(e.is_fatal());
}

#[test]
fn batched_request_and_short_batch() {
    let s = stub(vec![(200, ok_body("x", 4)), (200, ok_body("x", 3))]);
    let mut c = cfg(&s.url);
    c.batch_n = true;
    assert_eq!(sample_generations(&c, "p", 4, 1.0).unwrap().len(), 4);
    assert_eq!(
        sample_generations(&c, "p", 4, 1.0).unwrap_err(),
        GenError::Partial { got: 3, want: 4 }
    );
    let body: serde_json::Value = serde_json::from_str(&s.requests.lock().unwrap()[0].1).unwrap();
    assert_eq!(body["n"], 4);
}

#[test]
fn token_sent_but_never_serialized() {
    let var = "SQLSHAPE_TEST_TOKEN_7781";
    std::env::set_var(var, "sekrit-value");
    let s = stub(vec![(200, ok_body("SELECT 1", 1))]);
    let mut c = cfg(&s.url);
    c.token_env = Some(var.into());
    let q = SpiderQuestion {
        question_id: "0".into(),
        db_id: "d".into(),
        question: "How many?".into(),
        gold_sql: "SELECT count(*) FROM t".into(),
    };
    let catalog = SchemaCatalog {
        db_id: "d".into(),
        tables: vec![TableSchema {
            table_name: "t".into(),
            columns: vec!["a".into()],
        }],
        foreign_keys: vec![],
    };
    let rec = generate_record(&c, &PromptTemplate::direct_sql(), &q, &catalog, 2, 1.0).unwrap();
    assert_eq!(rec.samples, ["SELECT 1", "SELECT 1"]);
    assert_eq!(rec.model, "stub-model");
    let headers = s.requests.lock().unwrap()[0].0.clone();
    assert!(headers.to_ascii_lowercase().contains("authorization: bearer sekrit-value"));
    assert!(!serde_json::to_string(&rec).unwrap().contains("sekrit"));
    assert!(!serde_json::to_string(&c).unwrap().contains("sekrit"));
    assert!(!format!("{c:?}").contains("sekrit"));

    c.token_env = Some("SQLSHAPE_TEST_TOKEN_UNSET_1".into());
    assert!(matches!(
        sample_generations(&c, "p", 1, 1.0),
        Err(GenError::MissingToken(_))
    ));
}
