//! Batch scoring: response resolution, extraction, segmentation, embedding,
//! metrics, verdicts and corpus-relative composite scores.

use std::collections::HashMap;

use logicality_core::analysis::{FLAG_DEFAULT_WEIGHT, FLAG_EMPTY_TRACE, FLAG_UNCLOSED_THINK};
use logicality_core::metrics::ScoreError;
use logicality_core::{
    composite_score, corpus_stats, extract_reasoning, judge_mcq, score_trace, segment, tau_sweep,
    CompositeConfig, CorpusStats, LogicalityScores, MetricConfig, QuestionType, ScoredItem,
    SegmenterConfig, SentenceEncoder, SimilarityMatrix, SweepRow, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DatasetRecord;
use crate::encoders::{EmbedError, Lowercase};
use crate::error::{Error, Result};

pub const FLAG_INVALID_GOLD: &str = "invalid_gold";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreOptions {
    pub metric: MetricConfig,
    pub segmenter: SegmenterConfig,
    pub composite: CompositeConfig,
    /// Worker threads; 0 is treated as 1.
    pub jobs: usize,
    pub lowercase: bool,
}

impl ScoreOptions {
    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        self.segmenter.validate()?;
        self.composite.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub id: String,
    pub error: String,
    pub retryable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// Successful items in input order.
    pub results: Vec<ScoredItem>,
    pub failures: Vec<Failure>,
    /// Statistics over the non-empty traces, when there were any.
    pub stats: Option<CorpusStats>,
}

/// The separate responses map wins over an inline response.
pub fn resolve_response<'a>(rec: &'a DatasetRecord, responses: Option<&'a HashMap<String, String>>) -> Option<&'a str> {
    responses
        .and_then(|r| r.get(&rec.item.id))
        .map(String::as_str)
        .or(rec.response.as_deref())
}

fn failure(id: &str, err: ScoreError<EmbedError>) -> Failure {
    let retryable = matches!(&err, ScoreError::Encoder(e) if e.is_retryable());
    Failure {
        id: id.to_string(),
        error: err.to_string(),
        retryable,
    }
}

fn verdict_for(rec: &DatasetRecord, response: &str, flags: &mut Vec<String>) -> Verdict {
    if let Some(v) = rec.answer_verdict {
        return v;
    }
    if rec.item.question_type != QuestionType::Mcp {
        return Verdict::Unjudged;
    }
    match judge_mcq(response, &rec.item.answer) {
        Ok(v) => v,
        Err(_) => {
            flags.push(FLAG_INVALID_GOLD.to_string());
            Verdict::Unjudged
        }
    }
}

/// Scores one record without composite. Empty traces yield zeros plus the
/// `empty_trace` flag rather than an error.
pub fn score_record<E>(rec: &DatasetRecord, response: Option<&str>, encoder: &E, opts: &ScoreOptions) -> Result<ScoredItem, Failure>
where
    E: SentenceEncoder<Error = EmbedError>,
{
    let id = rec.item.id.as_str();
    let Some(response) = response else {
        return Err(Failure {
            id: id.to_string(),
            error: "no response for item".into(),
            retryable: false,
        });
    };
    let mut flags = Vec::new();
    if rec.default_weight {
        flags.push(FLAG_DEFAULT_WEIGHT.to_string());
    }
    let extraction = extract_reasoning(response);
    if extraction.unclosed_think {
        flags.push(FLAG_UNCLOSED_THINK.to_string());
    }
    let trace = segment(&extraction.text, &opts.segmenter);
    let answer_verdict = Some(verdict_for(rec, response, &mut flags));

    let nexuses = &rec.item.nexuses;
    if trace.is_empty() {
        flags.push(FLAG_EMPTY_TRACE.to_string());
        return Ok(ScoredItem {
            item_id: id.to_string(),
            trace_len: 0,
            scores: LogicalityScores::zeros(nexuses.len()),
            composite: None,
            answer_verdict,
            flags,
        });
    }
    let scored = if opts.lowercase {
        score_trace(nexuses, &trace, &Lowercase(encoder), &opts.metric)
    } else {
        score_trace(nexuses, &trace, encoder, &opts.metric)
    };
    let (scores, _, _) = scored.map_err(|e| failure(id, e))?;
    Ok(ScoredItem {
        item_id: id.to_string(),
        trace_len: trace.len(),
        scores,
        composite: None,
        answer_verdict,
        flags,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Fills `composite` on every result from statistics over the non-empty
/// traces. Returns those statistics, or `None` when every trace was empty.
pub fn apply_composite(results: &mut [ScoredItem], cfg: &CompositeConfig) -> Option<CorpusStats> {
    let stats = corpus_stats(results.iter().filter(|r| !r.is_empty_trace()).map(|r| &r.scores)).ok()?;
    for r in results.iter_mut() {
        r.composite = Some(composite_score(&r.scores, &stats, cfg));
    }
    Some(stats)
}

/// Scores every record on `opts.jobs` threads; output order follows input
/// order regardless of scheduling.
pub fn score_batch<E>(
    records: &[DatasetRecord],
    responses: Option<&HashMap<String, String>>,
    encoder: &E,
    opts: &ScoreOptions,
) -> Result<BatchOutcome>
where
    E: SentenceEncoder<Error = EmbedError> + Sync,
{
    opts.validate()?;
    let outcomes: Vec<Result<ScoredItem, Failure>> = pool(opts.jobs)?.install(|| {
        records
            .par_iter()
            .map(|rec| score_record(rec, resolve_response(rec, responses), encoder, opts))
            .collect()
    });
    let mut results = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }
    let stats = apply_composite(&mut results, &opts.composite);
    Ok(BatchOutcome {
        results,
        failures,
        stats,
    })
}

/// A scored-ready instance: the similarity matrix and nexus weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub matrix: SimilarityMatrix,
    pub weights: Vec<f64>,
}

/// Builds similarity matrices for every record with a non-empty trace.
/// Empty traces are skipped; other problems become failures.
pub fn prepare_instances<E>(
    records: &[DatasetRecord],
    responses: Option<&HashMap<String, String>>,
    encoder: &E,
    opts: &ScoreOptions,
) -> Result<(Vec<Instance>, Vec<Failure>)>
where
    E: SentenceEncoder<Error = EmbedError> + Sync,
{
    opts.validate()?;
    let outcomes: Vec<Result<Option<Instance>, Failure>> = pool(opts.jobs)?.install(|| {
        records
            .par_iter()
            .map(|rec| {
                let id = rec.item.id.as_str();
                let response = resolve_response(rec, responses).ok_or_else(|| Failure {
                    id: id.to_string(),
                    error: "no response for item".into(),
                    retryable: false,
                })?;
                let trace = segment(&extract_reasoning(response).text, &opts.segmenter);
                if trace.is_empty() {
                    return Ok(None);
                }
                let scored = if opts.lowercase {
                    score_trace(&rec.item.nexuses, &trace, &Lowercase(encoder), &opts.metric)
                } else {
                    score_trace(&rec.item.nexuses, &trace, encoder, &opts.metric)
                };
                let (_, _, matrix) = scored.map_err(|e| failure(id, e))?;
                Ok(Some(Instance {
                    id: id.to_string(),
                    matrix,
                    weights: rec.item.nexuses.weights(),
                }))
            })
            .collect()
    });
    let mut instances = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(Some(i)) => instances.push(i),
            Ok(None) => {}
            Err(f) => failures.push(f),
        }
    }
    Ok((instances, failures))
}

/// Mean precision, recall and fidelity per threshold.
pub fn sweep(instances: &[Instance], taus: &[f64], opts: &ScoreOptions) -> Result<Vec<SweepRow>> {
    let pairs: Vec<(SimilarityMatrix, Vec<f64>)> =
        instances.iter().map(|i| (i.matrix.clone(), i.weights.clone())).collect();
    Ok(tau_sweep(&pairs, taus, opts.metric.strategy)?)
}

/// `0.1, 0.2, …, 0.9`.
pub fn default_taus() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_dataset_str;
    use logicality_core::HashEmbedder;
    use std::path::Path;

    fn record(response: Option<&str>) -> DatasetRecord {
        let line = serde_json::json!({
            "id": "q", "question": "?", "answer": "B", "question_type": "MCP",
            "difficulty": "undergraduate", "subfield": "mechanics",
            "nexuses": ["1. The block slides down the incline. (60 points)",
                        "2. Friction converts energy into heat. (40 points)"],
        });
        let mut r = parse_dataset_str(&line.to_string(), Path::new("t")).unwrap().remove(0);
        r.response = response.map(str::to_string);
        r
    }

    fn enc() -> crate::encoders::Embedder {
        crate::encoders::Embedder::Hash(HashEmbedder::default())
    }

    #[test]
    fn empty_and_whitespace_responses_get_zeros_and_flag() {
        for resp in ["", "   \n\t", "<think>  </think>\\boxed{B}"] {
            let r = score_record(&record(Some(resp)), Some(resp), &enc(), &ScoreOptions::default()).unwrap();
            assert!(r.is_empty_trace(), "{resp:?}");
            assert_eq!(r.trace_len, 0);
            assert_eq!(r.scores, LogicalityScores::zeros(2));
        }
    }

    #[test]
    fn normal_response_is_scored_and_judged() {
        let resp = "<think>The block slides down the incline. Friction converts energy into heat.</think> \\boxed{B}";
        let r = score_record(&record(Some(resp)), Some(resp), &enc(), &ScoreOptions::default()).unwrap();
        assert_eq!(r.trace_len, 2);
        assert!(r.flags.is_empty());
        assert!((r.scores.fidelity - 1.0).abs() < 1e-9);
        assert_eq!(r.scores.causal, 1.0);
        assert_eq!(r.answer_verdict, Some(Verdict::Correct));
    }

    #[test]
    fn missing_response_is_a_failure() {
        let f = score_record(&record(None), None, &enc(), &ScoreOptions::default()).unwrap_err();
        assert_eq!(f.id, "q");
        assert!(!f.retryable);
    }

    #[test]
    fn separate_responses_win() {
        let rec = record(Some("inline"));
        let mut map = HashMap::new();
        assert_eq!(resolve_response(&rec, Some(&map)), Some("inline"));
        map.insert("q".to_string(), "separate".to_string());
        assert_eq!(resolve_response(&rec, Some(&map)), Some("separate"));
    }

    #[test]
    fn empty_traces_stay_out_of_corpus_stats() {
        let a = "<think>The block slides down the incline. Friction converts energy into heat.</think>";
        let b = "<think>Friction converts energy into heat. The block slides down the incline.</think>";
        let mut recs = vec![record(Some(a)), record(Some(b)), record(Some(""))];
        for (k, r) in recs.iter_mut().enumerate() {
            r.item.id = format!("q{k}");
        }
        let out = score_batch(&recs, None, &enc(), &ScoreOptions::default()).unwrap();
        let stats = out.stats.unwrap();
        assert_eq!(stats.count, 2);
        assert!(out.results.iter().all(|r| r.composite.is_some()));
        assert_eq!(out.results.iter().map(|r| r.item_id.as_str()).collect::<Vec<_>>(), ["q0", "q1", "q2"]);
    }

    #[test]
    fn all_empty_corpus_has_no_composite() {
        let out = score_batch(&[record(Some(""))], None, &enc(), &ScoreOptions::default()).unwrap();
        assert!(out.stats.is_none());
        assert_eq!(out.results[0].composite, None);
    }
}
