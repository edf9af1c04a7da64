//! Embedding vectors, cosine similarity and the nexus-by-step similarity matrix.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::convert::Infallible;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::ZeroDim);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Cosine similarity of two raw slices of equal length. Zero-norm input gives 0.
pub(crate) fn cosine_slices(a: &[f64], b: &[f64]) -> f64 {
    cosine_parts(dot(a, b), dot(a, a), dot(b, b))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `dot / sqrt(|a|^2 |b|^2)`; a vector compared with itself gives exactly 1.
fn cosine_parts(dot: f64, sq_a: f64, sq_b: f64) -> f64 {
    if sq_a == 0.0 || sq_b == 0.0 {
        return 0.0;
    }
    (dot / libm::sqrt(sq_a * sq_b)).clamp(-1.0, 1.0)
}

/// `a·b / (‖a‖‖b‖)`, clamped to `[-1, 1]`; 0 when either vector has zero norm.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, Error> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(cosine_slices(&a.values, &b.values))
}

/// Row-major `n x m` cosine matrix; row `i` is nexus `i`, column `j` is step `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, Error> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptySide);
        }
        if entries.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                left: cols,
                right: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Number of nexuses.
    pub fn n(&self) -> usize {
        self.rows
    }

    /// Number of reasoning steps.
    pub fn m(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Matrix with columns reordered so that new column `k` is old column `order[k]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self, Error> {
        if order.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: order.len(),
            });
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..self.rows {
            let row = self.row(i);
            entries.extend(order.iter().map(|&j| row[j]));
        }
        Self::new(self.rows, self.cols, entries)
    }
}

/// `entries[i][j] = cosine(nexus_vecs[i], step_vecs[j])`.
pub fn build_matrix(
    nexus_vecs: &[EmbeddingVector],
    step_vecs: &[EmbeddingVector],
) -> Result<SimilarityMatrix, Error> {
    let first = nexus_vecs.first().ok_or(Error::EmptySide)?;
    if step_vecs.is_empty() {
        return Err(Error::EmptySide);
    }
    let dim = first.dim();
    if let Some(bad) = nexus_vecs.iter().chain(step_vecs).find(|v| v.dim() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let step_sq: Vec<f64> = step_vecs.iter().map(|v| dot(&v.values, &v.values)).collect();
    let mut entries = Vec::with_capacity(nexus_vecs.len() * step_vecs.len());
    for nv in nexus_vecs {
        let nexus_sq = dot(&nv.values, &nv.values);
        for (sv, &sq) in step_vecs.iter().zip(&step_sq) {
            entries.push(cosine_parts(dot(&nv.values, &sv.values), nexus_sq, sq));
        }
    }
    SimilarityMatrix::new(nexus_vecs.len(), step_vecs.len(), entries)
}

/// Anything that maps sentences to vectors, one per input, in order.
pub trait SentenceEncoder {
    type Error;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, Self::Error>;
}

impl<T: SentenceEncoder + ?Sized> SentenceEncoder for &T {
    type Error = T::Error;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, Self::Error> {
        (**self).encode(texts)
    }
}

pub const HASH_EMBEDDER_DIM: usize = 256;

/// Offline feature-hashing encoder.
///
/// Word unigrams, word bigrams and boundary-marked character trigrams are
/// hashed (FNV-1a, seeded) into signed buckets and the result is unit
/// normalized. Texts that share tokens get higher cosine. Output depends only
/// on the text bytes and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self {
            dim: HASH_EMBEDDER_DIM,
            seed: 0,
        }
    }
}

const UNIGRAM_WEIGHT: f64 = 1.0;
const BIGRAM_WEIGHT: f64 = 0.7;
const TRIGRAM_WEIGHT: f64 = 0.3;

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::ZeroDim);
        }
        Ok(Self { dim, seed })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            dim: HASH_EMBEDDER_DIM,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed(&self, text: &str) -> EmbeddingVector {
        let tokens = tokenize(text);
        let mut acc = vec![0.0f64; self.dim];
        if tokens.is_empty() {
            self.add_feature(&mut acc, b"raw", text.trim().as_bytes(), 1.0);
        }
        for token in &tokens {
            self.add_feature(&mut acc, b"w", token.as_bytes(), UNIGRAM_WEIGHT);
            let marked: Vec<char> = core::iter::once('<')
                .chain(token.chars())
                .chain(core::iter::once('>'))
                .collect();
            let mut buf = String::new();
            for window in marked.windows(3) {
                buf.clear();
                buf.extend(window);
                self.add_feature(&mut acc, b"c", buf.as_bytes(), TRIGRAM_WEIGHT);
            }
        }
        let mut buf = String::new();
        for pair in tokens.windows(2) {
            buf.clear();
            buf.push_str(&pair[0]);
            buf.push(' ');
            buf.push_str(&pair[1]);
            self.add_feature(&mut acc, b"b", buf.as_bytes(), BIGRAM_WEIGHT);
        }
        let n = norm(&acc);
        if n > 0.0 {
            acc.iter_mut().for_each(|v| *v /= n);
        }
        EmbeddingVector { values: acc }
    }

    fn add_feature(&self, acc: &mut [f64], kind: &[u8], bytes: &[u8], weight: f64) {
        let mut h = fnv1a(FNV_OFFSET, &self.seed.to_le_bytes());
        h = fnv1a(h, kind);
        h = fnv1a(h, &[0xff]);
        h = fnv1a(h, bytes);
        // Final avalanche so low bits and the sign bit are well mixed.
        h ^= h >> 33;
        h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
        h ^= h >> 33;
        let bucket = (h % self.dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        acc[bucket] += sign * weight;
    }
}

impl SentenceEncoder for HashEmbedder {
    type Error = Infallible;

    fn encode(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, Infallible> {
        Ok(texts.iter().map(|t| self.embed(t)).collect())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Lowercased alphanumeric runs.
fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
