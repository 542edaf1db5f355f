use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::GenError;

/// Where and how to sample. The bearer token is read from the environment
/// variable named in `token_env` at call time and never stored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "defaults::timeout_ms")]
    pub request_timeout_ms: u64,
    #[serde(default = "defaults::max_retries")]
    pub max_retries: u32,
    #[serde(default = "defaults::backoff_ms")]
    pub backoff_base_ms: u64,
    /// Requests per minute; 0 disables limiting.
    #[serde(default = "defaults::rpm")]
    pub requests_per_minute: u32,
    #[serde(default = "defaults::in_flight")]
    pub max_in_flight: usize,
    /// Ask for all k samples in one request via `n`.
    #[serde(default)]
    pub batch_n: bool,
}

mod defaults {
    pub fn timeout_ms() -> u64 {
        60_000
    }
    pub fn max_retries() -> u32 {
        5
    }
    pub fn backoff_ms() -> u64 {
        500
    }
    pub fn rpm() -> u32 {
        60
    }
    pub fn in_flight() -> usize {
        4
    }
}

impl ProviderConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            token_env: None,
            request_timeout_ms: defaults::timeout_ms(),
            max_retries: defaults::max_retries(),
            backoff_base_ms: defaults::backoff_ms(),
            requests_per_minute: defaults::rpm(),
            max_in_flight: defaults::in_flight(),
            batch_n: false,
        }
    }

    fn token(&self) -> Result<Option<String>, GenError> {
        match &self.token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| GenError::MissingToken(var.clone())),
        }
    }
}

/// One raw output with request metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub text: String,
    /// Position of the request that produced it.
    pub request: usize,
    /// Retries spent on that request.
    pub retries: u32,
}

struct TokenBucket {
    per_sec: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    fn new(rpm: u32, burst: usize) -> Option<Self> {
        (rpm > 0).then(|| {
            let capacity = burst.max(1) as f64;
            TokenBucket {
                per_sec: rpm as f64 / 60.0,
                capacity,
                state: Mutex::new((capacity, Instant::now())),
            }
        })
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut s = self.state.lock().unwrap();
                let now = Instant::now();
                s.0 = (s.0 + now.duration_since(s.1).as_secs_f64() * self.per_sec).min(self.capacity);
                s.1 = now;
                if s.0 >= 1.0 {
                    s.0 -= 1.0;
                    return;
                }
                (1.0 - s.0) / self.per_sec
            };
            thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

enum Attempt {
    Done(Vec<String>),
    Retry(String),
    Fatal(GenError),
}

fn request_once(agent: &ureq::Agent, cfg: &ProviderConfig, token: Option<&str>, body: &Value) -> Attempt {
    let mut req = agent.post(&cfg.endpoint).header("Content-Type", "application/json");
    if let Some(t) = token {
        req = req.header("Authorization", format!("Bearer {t}"));
    }
    let mut resp = match req.send(body.to_string()) {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(format!("transport: {e}")),
    };
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap_or_default();
    match status {
        200..=299 => match parse_choices(&text) {
            Ok(v) => Attempt::Done(v),
            Err(e) => Attempt::Fatal(e),
        },
        401 | 403 => Attempt::Fatal(GenError::Auth(status)),
        429 | 500..=599 => Attempt::Retry(format!("HTTP {status}")),
        _ => Attempt::Fatal(GenError::BadResponse(format!("HTTP {status}"))),
    }
}

fn parse_choices(text: &str) -> Result<Vec<String>, GenError> {
    let v: Value = serde_json::from_str(text).map_err(|e| GenError::BadResponse(e.to_string()))?;
    let choices = v["choices"]
        .as_array()
        .ok_or_else(|| GenError::BadResponse("no choices array".into()))?;
    choices
        .iter()
        .map(|c| {
            c["message"]["content"]
                .as_str()
                .or_else(|| c["text"].as_str())
                .map(String::from)
                .ok_or_else(|| GenError::BadResponse("choice without content".into()))
        })
        .collect()
}

fn with_retries(
    agent: &ureq::Agent,
    cfg: &ProviderConfig,
    token: Option<&str>,
    body: &Value,
    bucket: Option<&TokenBucket>,
) -> Result<(Vec<String>, u32), GenError> {
    let mut retries = 0;
    loop {
        if let Some(b) = bucket {
            b.acquire();
        }
        match request_once(agent, cfg, token, body) {
            Attempt::Done(v) => return Ok((v, retries)),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(last) => {
                if retries >= cfg.max_retries {
                    return Err(GenError::RetriesExhausted { retries, last });
                }
                let backoff = cfg.backoff_base_ms.saturating_mul(1 << retries.min(16));
                thread::sleep(Duration::from_millis(backoff));
                retries += 1;
            }
        }
    }
}

/// Draws exactly `k` outputs. Independent calls run at most
/// `max_in_flight` at a time; results are in request order. Any failed
/// request fails the whole batch.
pub fn sample_generations(cfg: &ProviderConfig, prompt: &str, k: usize, temperature: f64) -> Result<Vec<Sample>, GenError> {
    if k == 0 {
        return Err(GenError::BadResponse("k must be at least 1".into()));
    }
    let token = cfg.token()?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(cfg.request_timeout_ms)))
        .http_status_as_error(false)
        .build()
        .into();
    let bucket = TokenBucket::new(cfg.requests_per_minute, cfg.max_in_flight);
    let mut body = json!({
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    });

    if cfg.batch_n {
        body["n"] = json!(k);
        let (texts, retries) = with_retries(&agent, cfg, token.as_deref(), &body, bucket.as_ref())?;
        if texts.len() != k {
            return Err(GenError::Partial { got: texts.len(), want: k });
        }
        return Ok(texts
            .into_iter()
            .map(|text| Sample { text, request: 0, retries })
            .collect());
    }

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<Sample, GenError>>>> = (0..k).map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..cfg.max_in_flight.clamp(1, k) {
            s.spawn(|| loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= k {
                    break;
                }
                let r = with_retries(&agent, cfg, token.as_deref(), &body, bucket.as_ref()).and_then(|(mut v, retries)| {
                    if v.len() != 1 {
                        return Err(GenError::Partial { got: v.len(), want: 1 });
                    }
                    Ok(Sample {
                        text: v.remove(0),
                        request: i,
                        retries,
                    })
                });
                if r.is_err() {
                    stop.store(true, Ordering::Relaxed);
                }
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(k);
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(s)) => out.push(s),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    if out.len() != k {
        return Err(GenError::Partial { got: out.len(), want: k });
    }
    Ok(out)
}
