//! Sentence-encoder providers: the offline hash embedder, a file-backed
//! vector store, and a client for the `/embed` HTTP protocol.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use logicality_core::{EmbeddingVector, HashEmbedder, SentenceEncoder};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fsio::{numbered_lines, read_to_string, write_atomic};

pub const TOKEN_ENV: &str = "LOGICALITY_EMBED_TOKEN";
pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;
/// The sentence encoder used for the published reference numbers.
pub const DEFAULT_MODEL: &str = "all-MiniLM-L6-v2";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("no stored vector for text hash {hash}")]
    Missing { hash: String },
    #[error("embedding request failed after {attempts} attempt(s): {message}")]
    Http { attempts: u32, message: String },
    #[error("bad embedding response: {0}")]
    Protocol(String),
    #[error("embedding dim mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("vector store {path}:{line}: {message}")]
    Store { path: PathBuf, line: usize, message: String },
}

impl EmbedError {
    /// Transport failures and non-2xx answers may succeed on a later run.
    pub fn is_retryable(&self) -> bool {
        matches!(self, EmbedError::Http { .. })
    }
}

/// Canonical key for a text: lowercase hex SHA-256 of its UTF-8 bytes.
pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn check_dims(vectors: &[EmbeddingVector], expected: Option<usize>) -> Result<(), EmbedError> {
    let Some(first) = expected.or_else(|| vectors.first().map(|v| v.dim())) else {
        return Ok(());
    };
    match vectors.iter().find(|v| v.dim() != first) {
        Some(v) => Err(EmbedError::DimMismatch {
            expected: first,
            found: v.dim(),
        }),
        None => Ok(()),
    }
}

#[derive(Serialize, Deserialize)]
struct StoreLine {
    hash: String,
    text: String,
    vector: Vec<f64>,
}

/// Precomputed vectors keyed by [`text_hash`].
#[derive(Debug, Clone, Default)]
pub struct FileStore {
    vectors: HashMap<String, EmbeddingVector>,
    dim: Option<usize>,
}

impl FileStore {
    pub fn open(path: &Path) -> Result<Self, crate::Error> {
        let text = read_to_string(path)?;
        let store_err = |line, message: String| EmbedError::Store {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut store = FileStore::default();
        for (line_no, line) in numbered_lines(&text) {
            let rec: StoreLine = serde_json::from_str(line).map_err(|e| store_err(line_no, e.to_string()))?;
            if rec.hash != text_hash(&rec.text) {
                return Err(store_err(line_no, format!("hash {} does not match its text", rec.hash)).into());
            }
            let v = EmbeddingVector::new(rec.vector).map_err(|e| store_err(line_no, e.to_string()))?;
            store.insert_hashed(rec.hash, v).map_err(|e| store_err(line_no, e.to_string()))?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, text: &str, vector: EmbeddingVector) -> Result<(), EmbedError> {
        self.insert_hashed(text_hash(text), vector)
    }

    fn insert_hashed(&mut self, hash: String, vector: EmbeddingVector) -> Result<(), EmbedError> {
        check_dims(std::slice::from_ref(&vector), self.dim)?;
        self.dim = Some(vector.dim());
        self.vectors.insert(hash, vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Encodes `texts` (deduplicated, in first-seen order) with `encoder`
    /// and writes a store file.
    pub fn build<E>(path: &Path, texts: &[&str], encoder: &E) -> Result<(), crate::Error>
    where
        E: SentenceEncoder,
        E::Error: std::fmt::Display,
    {
        let mut seen = std::collections::HashSet::new();
        let unique: Vec<&str> = texts.iter().copied().filter(|t| seen.insert(*t)).collect();
        let vectors = encoder
            .encode(&unique)
            .map_err(|e| crate::Error::Config(format!("encoding store texts: {e}")))?;
        write_atomic(path, |w| {
            for (text, v) in unique.iter().zip(&vectors) {
                let line = StoreLine {
                    hash: text_hash(text),
                    text: (*text).to_string(),
                    vector: v.values().to_vec(),
                };
                writeln!(w, "{}", serde_json::to_string(&line).map_err(std::io::Error::other)?)?;
            }
            Ok(())
        })
    }
}

impl SentenceEncoder for FileStore {
    type Error = EmbedError;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts
            .iter()
            .map(|t| {
                let hash = text_hash(t);
                self.vectors.get(&hash).cloned().ok_or(EmbedError::Missing { hash })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Base URL; `/embed` is appended unless already present.
    pub endpoint: String,
    pub model: String,
    pub batch_size: usize,
    pub token: Option<String>,
    pub max_attempts: u32,
    pub timeout: Duration,
    pub backoff: Duration,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            batch_size: DEFAULT_BATCH_SIZE,
            token: None,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            timeout: Duration::from_secs(60),
            backoff: Duration::from_millis(200),
        }
    }

    /// Picks up the bearer token from the environment when set.
    pub fn with_env_token(mut self) -> Self {
        self.token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        self
    }

    fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/embed") {
            base.to_string()
        } else {
            format!("{base}/embed")
        }
    }
}

/// Client for `POST /embed`. Vectors are cached per text hash for the
/// lifetime of the encoder.
pub struct HttpEncoder {
    cfg: HttpConfig,
    agent: ureq::Agent,
    cache: Mutex<HashMap<String, EmbeddingVector>>,
    dim: Mutex<Option<usize>>,
}

impl HttpEncoder {
    pub fn new(cfg: HttpConfig) -> Result<Self, crate::Error> {
        if cfg.batch_size == 0 || cfg.max_attempts == 0 {
            return Err(crate::Error::Config("batch size and attempts must be at least 1".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            cfg,
            agent,
            cache: Mutex::new(HashMap::new()),
            dim: Mutex::new(None),
        })
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = serde_json::to_vec(&EmbedRequest {
            model: &self.cfg.model,
            texts,
        })
        .map_err(|e| EmbedError::Protocol(e.to_string()))?;
        let mut last = String::new();
        for attempt in 1..=self.cfg.max_attempts {
            match self.post_once(&body) {
                Ok(text) => return self.decode(&text, texts.len()),
                Err(message) => last = message,
            }
            if attempt < self.cfg.max_attempts {
                std::thread::sleep(self.cfg.backoff * attempt);
            }
        }
        Err(EmbedError::Http {
            attempts: self.cfg.max_attempts,
            message: last,
        })
    }

    /// The response body on 2xx, otherwise a description of the failure.
    fn post_once(&self, body: &[u8]) -> Result<String, String> {
        let mut req = self.agent.post(self.cfg.url()).header("Content-Type", "application/json");
        if let Some(token) = &self.cfg.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        if (200..300).contains(&status) {
            return Ok(text);
        }
        let detail = serde_json::from_str::<ErrorBody>(&text).map_or(text, |b| b.error);
        Err(format!("HTTP {status}: {detail}"))
    }

    fn decode(&self, text: &str, expected: usize) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let resp: EmbedResponse = serde_json::from_str(text).map_err(|e| EmbedError::Protocol(e.to_string()))?;
        if resp.vectors.len() != expected {
            return Err(EmbedError::Protocol(format!(
                "asked for {expected} vectors, got {}",
                resp.vectors.len()
            )));
        }
        let vectors = resp
            .vectors
            .into_iter()
            .map(|v| EmbeddingVector::new(v).map_err(|e| EmbedError::Protocol(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut dim = self.dim.lock().expect("dim lock");
        check_dims(&vectors, Some(dim.unwrap_or(resp.dim)))?;
        *dim = Some(resp.dim);
        Ok(vectors)
    }
}

impl SentenceEncoder for HttpEncoder {
    type Error = EmbedError;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let hashes: Vec<String> = texts.iter().map(|t| text_hash(t)).collect();
        let mut missing: Vec<(&str, &str)> = Vec::new();
        {
            let cache = self.cache.lock().expect("cache lock");
            let mut queued = std::collections::HashSet::new();
            for (t, h) in texts.iter().zip(&hashes) {
                if !cache.contains_key(h) && queued.insert(h.as_str()) {
                    missing.push((t, h));
                }
            }
        }
        for chunk in missing.chunks(self.cfg.batch_size) {
            let batch: Vec<&str> = chunk.iter().map(|(t, _)| *t).collect();
            let vectors = self.request(&batch)?;
            let mut cache = self.cache.lock().expect("cache lock");
            for ((_, h), v) in chunk.iter().zip(vectors) {
                cache.entry((*h).to_string()).or_insert(v);
            }
        }
        let cache = self.cache.lock().expect("cache lock");
        let out: Vec<EmbeddingVector> = hashes.iter().map(|h| cache[h].clone()).collect();
        check_dims(&out, None)?;
        Ok(out)
    }
}

/// Which provider to build, with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedderSpec {
    HashTest { seed: u64 },
    FileStore { path: PathBuf },
    HttpEncoder(HttpConfig),
}

impl EmbedderSpec {
    pub fn build(&self) -> Result<Embedder, crate::Error> {
        Ok(match self {
            EmbedderSpec::HashTest { seed } => Embedder::Hash(HashEmbedder::with_seed(*seed)),
            EmbedderSpec::FileStore { path } => Embedder::File(FileStore::open(path)?),
            EmbedderSpec::HttpEncoder(cfg) => Embedder::Http(Box::new(HttpEncoder::new(cfg.clone())?)),
        })
    }
}

pub enum Embedder {
    Hash(HashEmbedder),
    File(FileStore),
    Http(Box<HttpEncoder>),
}

impl SentenceEncoder for Embedder {
    type Error = EmbedError;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        match self {
            Embedder::Hash(h) => Ok(texts.iter().map(|t| h.embed(t)).collect()),
            Embedder::File(f) => f.encode(texts),
            Embedder::Http(c) => c.encode(texts),
        }
    }
}

/// Lowercases every text before handing it to the inner encoder.
pub struct Lowercase<E>(pub E);

impl<E: SentenceEncoder> SentenceEncoder for Lowercase<E> {
    type Error = E::Error;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, E::Error> {
        let lowered: Vec<String> = texts.iter().map(|t| t.to_lowercase()).collect();
        let refs: Vec<&str> = lowered.iter().map(String::as_str).collect();
        self.0.encode(&refs)
    }
}
