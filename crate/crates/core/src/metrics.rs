//! Logical fidelity, causal connection and inferential progress.

use alloc::vec::Vec;

use crate::embed::{build_matrix, cosine_slices, SentenceEncoder, SimilarityMatrix};
use crate::error::Error;
use crate::matching::{match_with, MatchStrategy, Matching};
use crate::types::{NexusSet, ReasoningTrace};
use crate::DEFAULT_TAU;

/// How negative cosines enter recall mass, centroid mass and similarity vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeSimilarity {
    /// Treat negative similarity as zero mass.
    #[default]
    Clamp,
    /// Use raw values; scores are still clamped into `[0, 1]` at the end.
    Keep,
}

impl NegativeSimilarity {
    #[inline]
    fn mass(self, v: f64) -> f64 {
        match self {
            NegativeSimilarity::Clamp => v.max(0.0),
            NegativeSimilarity::Keep => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub tau: f64,
    pub strategy: MatchStrategy,
    pub negatives: NegativeSimilarity,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            strategy: MatchStrategy::Greedy,
            negatives: NegativeSimilarity::Clamp,
        }
    }
}

impl MetricConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self {
            tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig("tau must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityScores {
    pub precision: f64,
    pub recall: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalScores {
    pub causal: f64,
    /// 1-based positional centroid per nexus; `None` when the nexus has no mass.
    pub centroids: Vec<Option<f64>>,
}

/// Per-trace bundle of all scores, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalityScores {
    pub precision: f64,
    pub recall: f64,
    pub fidelity: f64,
    pub causal: f64,
    pub progress: f64,
    pub centroids: Vec<Option<f64>>,
}

impl LogicalityScores {
    /// All-zero scores, used for traces that segment to nothing.
    pub fn zeros(n: usize) -> Self {
        Self {
            precision: 0.0,
            recall: 0.0,
            fidelity: 0.0,
            causal: 0.0,
            progress: 0.0,
            centroids: alloc::vec![None; n],
        }
    }

    /// Mean of fidelity, causal connection and progress.
    pub fn average(&self) -> f64 {
        (self.fidelity + self.causal + self.progress) / 3.0
    }
}

fn check_weights(m: &SimilarityMatrix, weights: &[f64]) -> Result<(), Error> {
    if weights.len() != m.n() {
        return Err(Error::LengthMismatch {
            left: m.n(),
            right: weights.len(),
        });
    }
    Ok(())
}

/// Harmonic mean that is 0 when both inputs are 0.
pub fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Recall is similarity-weighted nexus coverage, precision is the matched
/// fraction of steps, fidelity their harmonic mean.
pub fn logical_fidelity(
    m: &SimilarityMatrix,
    weights: &[f64],
    matching: &Matching,
) -> Result<FidelityScores, Error> {
    fidelity_with(m, weights, matching, NegativeSimilarity::Clamp)
}

fn fidelity_with(
    m: &SimilarityMatrix,
    weights: &[f64],
    matching: &Matching,
    negatives: NegativeSimilarity,
) -> Result<FidelityScores, Error> {
    check_weights(m, weights)?;
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let covered: f64 = matching
        .pairs()
        .iter()
        .map(|&(i, j)| weights[i] * negatives.mass(m.get(i, j)))
        .sum();
    let recall = (covered / total).clamp(0.0, 1.0);
    let precision = matching.len() as f64 / m.m() as f64;
    Ok(FidelityScores {
        precision,
        recall,
        fidelity: harmonic(precision, recall),
    })
}

/// Weighted fraction of nexus pairs `i < k` whose centroids satisfy
/// `P_i < P_k`. Pairs where either centroid is undefined are skipped; with no
/// usable pair the score is 1.
pub fn causal_connection(m: &SimilarityMatrix, weights: &[f64]) -> Result<CausalScores, Error> {
    causal_with(m, weights, NegativeSimilarity::Clamp, 1)
}

fn causal_with(
    m: &SimilarityMatrix,
    weights: &[f64],
    negatives: NegativeSimilarity,
    base: usize,
) -> Result<CausalScores, Error> {
    check_weights(m, weights)?;
    let centroids: Vec<Option<f64>> = (0..m.n())
        .map(|i| {
            let mass: f64 = m.row(i).iter().map(|&v| negatives.mass(v)).sum();
            // Normalizing each mass first keeps a single-peak row exactly on
            // its column, so rows peaking at the same step tie.
            (mass > 0.0).then(|| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (j + base) as f64 * (negatives.mass(v) / mass))
                    .sum()
            })
        })
        .collect();

    let (mut ordered, mut total) = (0.0, 0.0);
    for i in 0..centroids.len() {
        let Some(pi) = centroids[i] else { continue };
        for k in i + 1..centroids.len() {
            let Some(pk) = centroids[k] else { continue };
            let w = weights[i] + weights[k];
            total += w;
            if pi < pk {
                ordered += w;
            }
        }
    }
    let causal = if total > 0.0 {
        (ordered / total).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(CausalScores { causal, centroids })
}

/// Mean over steps `j >= 2` of `1 - max_{k<j} cos(S_j, S_k)` where `S_j` is
/// column `j`; a single-step trace scores 1.
pub fn inferential_progress(m: &SimilarityMatrix) -> f64 {
    progress_with(m, NegativeSimilarity::Clamp)
}

fn progress_with(m: &SimilarityMatrix, negatives: NegativeSimilarity) -> f64 {
    let steps = m.m();
    if steps <= 1 {
        return 1.0;
    }
    let columns: Vec<Vec<f64>> = (0..steps)
        .map(|j| m.column(j).map(|v| negatives.mass(v)).collect())
        .collect();
    let mut total = 0.0;
    for j in 1..steps {
        let closest = (0..j)
            .map(|k| cosine_slices(&columns[j], &columns[k]))
            .fold(f64::NEG_INFINITY, f64::max);
        total += 1.0 - closest;
    }
    (total / (steps - 1) as f64).clamp(0.0, 1.0)
}

/// Runs the configured matcher and all three metrics on a prepared matrix.
pub fn score_matrix(
    m: &SimilarityMatrix,
    weights: &[f64],
    cfg: &MetricConfig,
) -> Result<(LogicalityScores, Matching), Error> {
    check_weights(m, weights)?;
    let matching = match_with(cfg.strategy, m, cfg.tau, weights);
    let fidelity = fidelity_with(m, weights, &matching, cfg.negatives)?;
    let causal = causal_with(m, weights, cfg.negatives, 1)?;
    let progress = progress_with(m, cfg.negatives);
    Ok((
        LogicalityScores {
            precision: fidelity.precision,
            recall: fidelity.recall,
            fidelity: fidelity.fidelity,
            causal: causal.causal,
            progress,
            centroids: causal.centroids,
        },
        matching,
    ))
}

/// Failure of [`score_trace`]: either a scoring error or the encoder's own.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreError<E> {
    Score(Error),
    Encoder(E),
}

impl<E> From<Error> for ScoreError<E> {
    fn from(e: Error) -> Self {
        ScoreError::Score(e)
    }
}

impl<E: core::fmt::Display> core::fmt::Display for ScoreError<E> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScoreError::Score(e) => e.fmt(f),
            ScoreError::Encoder(e) => write!(f, "encoder: {e}"),
        }
    }
}

impl<E: core::fmt::Debug + core::fmt::Display> core::error::Error for ScoreError<E> {}

/// Embeds nexuses and steps, builds the cosine matrix and scores it.
pub fn score_trace<E: SentenceEncoder>(
    nexuses: &NexusSet,
    trace: &ReasoningTrace,
    encoder: &E,
    cfg: &MetricConfig,
) -> Result<(LogicalityScores, Matching, SimilarityMatrix), ScoreError<E::Error>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace.into());
    }
    let nexus_texts: Vec<&str> = nexuses.texts().collect();
    let step_texts: Vec<&str> = trace.steps().iter().map(|s| s.as_str()).collect();
    let nexus_vecs = encoder.encode(&nexus_texts).map_err(ScoreError::Encoder)?;
    let step_vecs = encoder.encode(&step_texts).map_err(ScoreError::Encoder)?;
    if nexus_vecs.len() != nexus_texts.len() || step_vecs.len() != step_texts.len() {
        return Err(Error::LengthMismatch {
            left: nexus_texts.len() + step_texts.len(),
            right: nexus_vecs.len() + step_vecs.len(),
        }
        .into());
    }
    let m = build_matrix(&nexus_vecs, &step_vecs)?;
    let (scores, matching) = score_matrix(&m, &nexuses.weights(), cfg)?;
    Ok((scores, matching, m))
}

/// Centroid-order score with 0-based positions; only exposed so the
/// position-base invariance can be checked.
#[doc(hidden)]
pub fn causal_connection_zero_based(m: &SimilarityMatrix, weights: &[f64]) -> Result<CausalScores, Error> {
    causal_with(m, weights, NegativeSimilarity::Clamp, 0)
}
