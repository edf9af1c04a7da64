//! Group comparisons, threshold sweeps and grouped aggregation of scored items.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::embed::SimilarityMatrix;
use crate::error::Error;
use crate::matching::{match_with, MatchStrategy};
use crate::metrics::{logical_fidelity, LogicalityScores};
use crate::stats::{mean, median};
use crate::types::{BenchmarkItem, Verdict};

/// Per-item result record.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredItem {
    pub item_id: String,
    /// Number of reasoning steps.
    pub trace_len: usize,
    pub scores: LogicalityScores,
    /// Present iff corpus statistics were available when scoring.
    pub composite: Option<f64>,
    pub answer_verdict: Option<Verdict>,
    /// Machine-readable warnings such as `empty_trace`.
    pub flags: Vec<String>,
}

pub const FLAG_EMPTY_TRACE: &str = "empty_trace";
pub const FLAG_UNCLOSED_THINK: &str = "unclosed_think";
pub const FLAG_DEFAULT_WEIGHT: &str = "default_weight";

impl ScoredItem {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Items whose trace segmented to nothing carry zero scores and are kept
    /// out of corpus statistics.
    pub fn is_empty_trace(&self) -> bool {
        self.has_flag(FLAG_EMPTY_TRACE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
}

fn summarize(xs: &[f64]) -> MetricSummary {
    MetricSummary {
        mean: mean(xs).unwrap_or(0.0),
        median: median(xs).unwrap_or(0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: Verdict,
    pub fidelity: MetricSummary,
    pub causal: MetricSummary,
    pub progress: MetricSummary,
    /// Summary of the per-item mean of F, O and P.
    pub average: MetricSummary,
    pub count: usize,
}

fn group_summary(group: Verdict, items: &[&ScoredItem]) -> GroupSummary {
    let pick = |f: fn(&LogicalityScores) -> f64| -> Vec<f64> { items.iter().map(|it| f(&it.scores)).collect() };
    GroupSummary {
        group,
        fidelity: summarize(&pick(|s| s.fidelity)),
        causal: summarize(&pick(|s| s.causal)),
        progress: summarize(&pick(|s| s.progress)),
        average: summarize(&pick(LogicalityScores::average)),
        count: items.len(),
    }
}

/// Summaries for the correct and incorrect groups. Items without a
/// correct/incorrect verdict are ignored.
pub fn group_compare(results: &[ScoredItem]) -> Result<(GroupSummary, GroupSummary), Error> {
    let correct: Vec<&ScoredItem> = results
        .iter()
        .filter(|r| r.answer_verdict == Some(Verdict::Correct))
        .collect();
    let incorrect: Vec<&ScoredItem> = results
        .iter()
        .filter(|r| r.answer_verdict == Some(Verdict::Incorrect))
        .collect();
    if correct.is_empty() {
        return Err(Error::EmptyGroup("correct"));
    }
    if incorrect.is_empty() {
        return Err(Error::EmptyGroup("incorrect"));
    }
    Ok((
        group_summary(Verdict::Correct, &correct),
        group_summary(Verdict::Incorrect, &incorrect),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_fidelity: f64,
    pub count: usize,
}

/// Mean fidelity per threshold over prepared `(matrix, weights)` instances.
/// Thresholds must be ascending within `[0, 1)`.
pub fn tau_sweep(
    instances: &[(SimilarityMatrix, Vec<f64>)],
    taus: &[f64],
    strategy: MatchStrategy,
) -> Result<Vec<SweepRow>, Error> {
    if taus.iter().any(|t| !(0.0..1.0).contains(t)) {
        return Err(Error::InvalidConfig("tau must lie in [0, 1)"));
    }
    if taus.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("taus must be sorted ascending"));
    }
    if instances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    taus.iter()
        .map(|&tau| {
            let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
            for (m, w) in instances {
                let matching = match_with(strategy, m, tau, w);
                let s = logical_fidelity(m, w, &matching)?;
                p += s.precision;
                r += s.recall;
                f += s.fidelity;
            }
            let n = instances.len() as f64;
            Ok(SweepRow {
                tau,
                mean_precision: p / n,
                mean_recall: r / n,
                mean_fidelity: f / n,
                count: instances.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grouping {
    Overall,
    Subfield,
    Difficulty,
    QuestionType,
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Overall => "overall",
            Grouping::Subfield => "subfield",
            Grouping::Difficulty => "difficulty",
            Grouping::QuestionType => "question_type",
        }
    }
}

/// Means over one group. `accuracy` counts only items judged correct or
/// incorrect and is `None` when there are none.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub grouping: Grouping,
    pub key: String,
    pub count: usize,
    pub fidelity: f64,
    pub causal: f64,
    pub progress: f64,
    pub judged: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn rows_for(&self, grouping: Grouping) -> impl Iterator<Item = &AggregateRow> {
        self.rows.iter().filter(move |r| r.grouping == grouping)
    }
}

#[derive(Default)]
struct Acc {
    count: usize,
    f: f64,
    o: f64,
    p: f64,
    judged: usize,
    correct: usize,
}

impl Acc {
    fn push(&mut self, r: &ScoredItem) {
        self.count += 1;
        self.f += r.scores.fidelity;
        self.o += r.scores.causal;
        self.p += r.scores.progress;
        match r.answer_verdict {
            Some(Verdict::Correct) => {
                self.judged += 1;
                self.correct += 1;
            }
            Some(Verdict::Incorrect) => self.judged += 1,
            _ => {}
        }
    }

    fn row(&self, grouping: Grouping, key: String) -> AggregateRow {
        let n = self.count as f64;
        AggregateRow {
            grouping,
            key,
            count: self.count,
            fidelity: self.f / n,
            causal: self.o / n,
            progress: self.p / n,
            judged: self.judged,
            accuracy: (self.judged > 0).then(|| self.correct as f64 / self.judged as f64),
        }
    }
}

/// Overall, per-subfield, per-difficulty and per-question-type means. Rows
/// within a grouping are sorted by key.
pub fn aggregate(results: &[ScoredItem], items: &[BenchmarkItem]) -> Result<AggregateReport, Error> {
    let by_id: BTreeMap<&str, &BenchmarkItem> = items.iter().map(|it| (it.id.as_str(), it)).collect();
    let mut overall = Acc::default();
    let mut groups: BTreeMap<(Grouping, String), Acc> = BTreeMap::new();
    for r in results {
        let item = by_id
            .get(r.item_id.as_str())
            .ok_or_else(|| Error::UnknownItem(r.item_id.clone()))?;
        overall.push(r);
        for key in [
            (Grouping::Subfield, item.subfield.clone()),
            (Grouping::Difficulty, item.difficulty.as_str().to_string()),
            (Grouping::QuestionType, item.question_type.as_str().to_string()),
        ] {
            groups.entry(key).or_default().push(r);
        }
    }
    let mut rows = Vec::with_capacity(groups.len() + 1);
    if overall.count > 0 {
        rows.push(overall.row(Grouping::Overall, "all".to_string()));
    }
    rows.extend(groups.into_iter().map(|((g, k), acc)| acc.row(g, k)));
    Ok(AggregateReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Difficulty, Nexus, NexusSet, QuestionType};
    use alloc::vec;

    fn scored(id: &str, f: f64, o: f64, p: f64, verdict: Option<Verdict>) -> ScoredItem {
        ScoredItem {
            item_id: id.into(),
            trace_len: 3,
            scores: LogicalityScores {
                precision: f,
                recall: f,
                fidelity: f,
                causal: o,
                progress: p,
                centroids: vec![],
            },
            composite: None,
            answer_verdict: verdict,
            flags: vec![],
        }
    }

    fn item(id: &str, subfield: &str) -> BenchmarkItem {
        BenchmarkItem {
            id: id.into(),
            question: "q".into(),
            answer: "A".into(),
            question_type: QuestionType::Mcp,
            difficulty: Difficulty::Masters,
            subfield: subfield.into(),
            nexuses: NexusSet::new(vec![Nexus {
                text: "n".into(),
                weight: 1.0,
            }])
            .unwrap(),
        }
    }

    #[test]
    fn single_item_per_group() {
        let rs = [
            scored("a", 0.6, 0.9, 0.3, Some(Verdict::Correct)),
            scored("b", 0.2, 0.4, 0.1, Some(Verdict::Incorrect)),
        ];
        let (c, i) = group_compare(&rs).unwrap();
        assert_eq!(c.count, 1);
        assert_eq!(c.fidelity, MetricSummary { mean: 0.6, median: 0.6 });
        assert_eq!(i.causal, MetricSummary { mean: 0.4, median: 0.4 });
        assert!((c.average.mean - 0.6).abs() < 1e-12);
    }

    #[test]
    fn empty_group_is_named() {
        let rs = [scored("a", 0.6, 0.9, 0.3, Some(Verdict::Correct))];
        assert_eq!(group_compare(&rs), Err(Error::EmptyGroup("incorrect")));
        let rs = [scored("a", 0.6, 0.9, 0.3, Some(Verdict::Unjudged))];
        assert_eq!(group_compare(&rs), Err(Error::EmptyGroup("correct")));
    }

    #[test]
    fn sweep_validation() {
        let m = SimilarityMatrix::from_rows(&[vec![0.5]]).unwrap();
        let inst = vec![(m, vec![1.0])];
        assert!(tau_sweep(&inst, &[0.5, 0.2], MatchStrategy::Greedy).is_err());
        assert!(tau_sweep(&inst, &[1.0], MatchStrategy::Greedy).is_err());
        let rows = tau_sweep(&inst, &[0.2, 0.6], MatchStrategy::Greedy).unwrap();
        assert_eq!(rows[0].mean_fidelity, crate::metrics::harmonic(1.0, 0.5));
        assert_eq!(rows[1].mean_fidelity, 0.0);
    }

    #[test]
    fn aggregate_single_item_everywhere() {
        let rs = [scored("a", 0.6, 0.9, 0.3, Some(Verdict::Correct))];
        let report = aggregate(&rs, &[item("a", "optics")]).unwrap();
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert_eq!((row.fidelity, row.causal, row.progress), (0.6, 0.9, 0.3));
            assert_eq!(row.accuracy, Some(1.0));
        }
    }

    #[test]
    fn aggregate_disjoint_subfields() {
        let rs = [
            scored("a", 0.6, 0.9, 0.3, None),
            scored("b", 0.2, 0.5, 0.1, Some(Verdict::Unjudged)),
        ];
        let report = aggregate(&rs, &[item("a", "optics"), item("b", "acoustics")]).unwrap();
        let sub: Vec<_> = report.rows_for(Grouping::Subfield).collect();
        assert_eq!(sub[0].key, "acoustics");
        assert_eq!(sub[0].fidelity, 0.2);
        assert_eq!(sub[1].fidelity, 0.6);
        assert_eq!(sub[1].accuracy, None);
    }

    #[test]
    fn aggregate_unknown_id() {
        let rs = [scored("zzz", 0.6, 0.9, 0.3, None)];
        assert_eq!(
            aggregate(&rs, &[item("a", "optics")]),
            Err(Error::UnknownItem("zzz".into()))
        );
    }
}
