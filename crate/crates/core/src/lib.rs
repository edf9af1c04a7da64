//! Scoring core for the logicality of step-by-step reasoning traces.
//!
//! A reasoning trace is segmented into sentence-level steps, both the steps and
//! the ground-truth logical nexuses are embedded, and the resulting cosine
//! matrix drives three metrics:
//!
//! - **Logical fidelity** (`F`): harmonic mean of step precision and
//!   weight-and-similarity recall over a one-to-one matching.
//! - **Causal connection** (`O`): weighted fraction of nexus pairs whose
//!   positional centroids appear in ground-truth order.
//! - **Inferential progress** (`P`): mean novelty of each step's similarity
//!   vector against all earlier steps.
//!
//! On top of the metrics the crate provides the composite score used for
//! logic-guided data selection, correlation statistics, MCQ answer judging and
//! grouped aggregation. Everything here is pure computation; file formats,
//! network encoders and the CLI live in the `logicality` crate.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod embed;
pub mod error;
pub mod extract;
pub mod judge;
pub mod matching;
pub mod metrics;
pub mod nexus;
pub mod sampling;
pub mod segment;
pub mod stats;
pub mod types;

pub use analysis::{
    aggregate, group_compare, tau_sweep, AggregateReport, AggregateRow, GroupSummary, Grouping,
    MetricSummary, ScoredItem, SweepRow,
};
pub use embed::{build_matrix, cosine, EmbeddingVector, HashEmbedder, SentenceEncoder, SimilarityMatrix};
pub use error::Error;
pub use extract::{extract_reasoning, Extraction};
pub use judge::{extract_boxed, judge_mcq};
pub use matching::{match_dp, match_greedy, MatchStrategy, Matching};
pub use metrics::{
    causal_connection, inferential_progress, logical_fidelity, score_matrix, score_trace,
    CausalScores, FidelityScores, LogicalityScores, MetricConfig, NegativeSimilarity, ScoreError,
};
pub use nexus::{parse_nexus_line, NexusLine};
pub use sampling::{
    ablation_config, composite_score, corpus_stats, select_top_kappa, selection_size,
    CompositeConfig, CorpusStats, Dimension, Moments,
};
pub use segment::{segment, SegmenterConfig};
pub use stats::{mean, median, pearson, spearman};
pub use types::{BenchmarkItem, Difficulty, Nexus, NexusSet, QuestionType, ReasoningTrace, TraceSource, Verdict};

/// Default similarity threshold for a nexus/step pair to be matchable.
pub const DEFAULT_TAU: f64 = 0.3;
