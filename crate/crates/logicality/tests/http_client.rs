//! `/embed` client against a scripted in-process HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use logicality::core::SentenceEncoder;
use logicality::encoders::{EmbedError, HttpConfig, HttpEncoder, TOKEN_ENV};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

type Handler = dyn Fn(usize, &Value) -> (u16, String) + Send + Sync;

struct MockServer {
    url: String,
    seen: Arc<Mutex<Vec<Seen>>>,
}

impl MockServer {
    fn start(handler: impl Fn(usize, &Value) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        let handler: Arc<Handler> = Arc::new(handler);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    continue;
                }
                let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
                let (mut length, mut authorization) = (0, None);
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    let (name, value) = line.split_once(':').unwrap_or((&line, ""));
                    match name.to_ascii_lowercase().as_str() {
                        "content-length" => length = value.trim().parse().unwrap_or(0),
                        "authorization" => authorization = Some(value.trim().to_string()),
                        _ => {}
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
                let n = {
                    let mut log = log.lock().unwrap();
                    log.push(Seen {
                        path,
                        authorization,
                        body: body.clone(),
                    });
                    log.len()
                };
                let (status, text) = handler(n, &body);
                let response = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                    text.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        MockServer { url, seen }
    }

    fn requests(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }
}

fn toy_vector(text: &str) -> Vec<f64> {
    vec![text.len() as f64, text.matches('a').count() as f64 + 1.0, 1.0]
}

/// Answers every request with toy vectors for the texts it was sent.
fn echo(_: usize, body: &Value) -> (u16, String) {
    let vectors: Vec<Vec<f64>> = body["texts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| toy_vector(t.as_str().unwrap()))
        .collect();
    (200, json!({"dim": 3, "vectors": vectors}).to_string())
}

fn config(url: &str) -> HttpConfig {
    let mut cfg = HttpConfig::new(url, "all-MiniLM-L6-v2");
    cfg.backoff = Duration::from_millis(1);
    cfg.timeout = Duration::from_secs(10);
    cfg
}

#[test]
fn round_trip_batches_and_caches() {
    let server = MockServer::start(echo);
    let mut cfg = config(&server.url);
    cfg.batch_size = 2;
    let enc = HttpEncoder::new(cfg).unwrap();
    let texts = ["alpha", "beta", "alpha", "gamma", "delta", "epsilon"];
    let vectors = enc.encode(&texts).unwrap();
    assert_eq!(vectors.len(), 6);
    for (t, v) in texts.iter().zip(&vectors) {
        assert_eq!(v.values(), toy_vector(t).as_slice());
    }
    let reqs = server.requests();
    let batches: Vec<Vec<&str>> = reqs
        .iter()
        .map(|r| r.body["texts"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect())
        .collect();
    assert_eq!(batches, vec![vec!["alpha", "beta"], vec!["gamma", "delta"], vec!["epsilon"]]);
    assert!(reqs.iter().all(|r| r.path == "/embed" && r.body["model"] == "all-MiniLM-L6-v2"));
    assert!(reqs.iter().all(|r| r.authorization.is_none()));
    assert_eq!(enc.cached(), 5);

    enc.encode(&["beta", "alpha"]).unwrap();
    assert_eq!(server.requests().len(), 3, "cached texts are not re-sent");
    enc.encode(&["zeta"]).unwrap();
    assert_eq!(server.requests().len(), 4);
}

#[test]
fn bearer_token_and_explicit_path() {
    let server = MockServer::start(echo);
    let mut cfg = config(&format!("{}/embed/", server.url));
    cfg.token = Some("s3cret".into());
    HttpEncoder::new(cfg).unwrap().encode(&["one"]).unwrap();
    let reqs = server.requests();
    assert_eq!(reqs[0].path, "/embed");
    assert_eq!(reqs[0].authorization.as_deref(), Some("Bearer s3cret"));
}

#[test]
fn retries_until_success() {
    let server = MockServer::start(|n, body| {
        if n < 3 {
            (503, json!({"error": "warming up"}).to_string())
        } else {
            echo(n, body)
        }
    });
    let v = HttpEncoder::new(config(&server.url)).unwrap().encode(&["x"]).unwrap();
    assert_eq!(v[0].values(), toy_vector("x").as_slice());
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn gives_up_after_max_attempts_with_error_body() {
    let server = MockServer::start(|_, _| (500, json!({"error": "model not loaded"}).to_string()));
    let mut cfg = config(&server.url);
    cfg.max_attempts = 4;
    let err = HttpEncoder::new(cfg).unwrap().encode(&["x"]).unwrap_err();
    match &err {
        EmbedError::Http { attempts, message } => {
            assert_eq!(*attempts, 4);
            assert!(message.contains("500") && message.contains("model not loaded"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.is_retryable());
    assert_eq!(server.requests().len(), 4);
}

#[test]
fn unreachable_endpoint_is_retryable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = config(&format!("http://127.0.0.1:{port}"));
    cfg.max_attempts = 2;
    let err = HttpEncoder::new(cfg).unwrap().encode(&["x"]).unwrap_err();
    assert!(matches!(err, EmbedError::Http { attempts: 2, .. }), "{err:?}");
}

#[test]
fn dim_mismatch_is_rejected() {
    let server = MockServer::start(|_, _| (200, json!({"dim": 3, "vectors": [[1.0, 2.0]]}).to_string()));
    let err = HttpEncoder::new(config(&server.url)).unwrap().encode(&["x"]).unwrap_err();
    assert_eq!(err, EmbedError::DimMismatch { expected: 3, found: 2 });
    assert!(!err.is_retryable());
}

#[test]
fn dim_change_between_batches_is_rejected() {
    let server = MockServer::start(|n, body| {
        if n == 1 {
            echo(n, body)
        } else {
            (200, json!({"dim": 2, "vectors": [[1.0, 2.0]]}).to_string())
        }
    });
    let mut cfg = config(&server.url);
    cfg.batch_size = 1;
    let err = HttpEncoder::new(cfg).unwrap().encode(&["a", "b"]).unwrap_err();
    assert_eq!(err, EmbedError::DimMismatch { expected: 3, found: 2 });
}

#[test]
fn wrong_vector_count_and_garbage_are_protocol_errors() {
    let server = MockServer::start(|n, _| match n {
        1 => (200, json!({"dim": 3, "vectors": []}).to_string()),
        _ => (200, "not json".to_string()),
    });
    let enc = HttpEncoder::new(config(&server.url)).unwrap();
    assert!(matches!(enc.encode(&["a"]), Err(EmbedError::Protocol(_))));
    assert!(matches!(enc.encode(&["a"]), Err(EmbedError::Protocol(_))));
    assert_eq!(server.requests().len(), 2, "malformed 2xx bodies are not retried");
}

#[test]
fn cli_scores_through_the_http_encoder() {
    let server = MockServer::start(echo);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scores.jsonl");
    let dataset = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/items12.jsonl");
    let status = Command::new(env!("CARGO_BIN_EXE_logicality"))
        .args(["score", "--dataset", dataset, "--embedder", "http", "--endpoint", &server.url, "--batch-size", "8"])
        .arg("--out")
        .arg(&out)
        .env(TOKEN_ENV, "tok")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 12);
    let reqs = server.requests();
    assert!(!reqs.is_empty());
    assert!(reqs.iter().all(|r| r.authorization.as_deref() == Some("Bearer tok")));
    assert!(reqs.iter().all(|r| r.body["texts"].as_array().unwrap().len() <= 8));
}
