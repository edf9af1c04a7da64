//! Machine-readable JSON and aligned plain-text renderings of study results.

use std::collections::BTreeMap;

use logicality_core::analysis::{AggregateReport, GroupSummary, MetricSummary};
use logicality_core::{pearson, spearman, ScoredItem, SweepRow};
use serde_json::{json, Value};

use crate::dataset::RatingRecord;
use crate::error::{Error, Result};

/// Left-aligned first column, right-aligned numeric columns, two-space gaps.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let render = |cells: &mut dyn Iterator<Item = &str>| {
        let mut line = String::new();
        for (k, (cell, w)) in cells.zip(&widths).enumerate() {
            if k > 0 {
                line.push_str("  ");
            }
            let pad = w - cell.chars().count();
            if k == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        line.trim_end().to_string()
    };
    let mut out = render(&mut header.iter().copied());
    out.push('\n');
    for row in rows {
        out.push_str(&render(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Columns: grouping, key, n, F, O, P, judged, acc.
pub const AGGREGATE_COLUMNS: &[&str] = &["grouping", "key", "n", "F", "O", "P", "judged", "acc"];

pub fn aggregate_json(report: &AggregateReport) -> Value {
    Value::Array(
        report
            .rows
            .iter()
            .map(|r| {
                json!({
                    "grouping": r.grouping.as_str(),
                    "key": r.key,
                    "n": r.count,
                    "f": r.fidelity,
                    "o": r.causal,
                    "p": r.progress,
                    "judged": r.judged,
                    "accuracy": r.accuracy,
                })
            })
            .collect(),
    )
}

pub fn aggregate_text(report: &AggregateReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.grouping.as_str().to_string(),
                r.key.clone(),
                r.count.to_string(),
                f4(r.fidelity),
                f4(r.causal),
                f4(r.progress),
                r.judged.to_string(),
                r.accuracy.map_or_else(|| "-".to_string(), f4),
            ]
        })
        .collect();
    text_table(AGGREGATE_COLUMNS, &rows)
}

fn summary_json(s: &MetricSummary) -> Value {
    json!({"mean": s.mean, "median": s.median})
}

fn group_json(g: &GroupSummary) -> Value {
    json!({
        "group": g.group.as_str(),
        "n": g.count,
        "f": summary_json(&g.fidelity),
        "o": summary_json(&g.causal),
        "p": summary_json(&g.progress),
        "average": summary_json(&g.average),
    })
}

pub fn compare_json(correct: &GroupSummary, incorrect: &GroupSummary) -> Value {
    json!({"correct": group_json(correct), "incorrect": group_json(incorrect)})
}

/// Columns: group, n, then mean and median for F, O, P and their average.
pub fn compare_text(correct: &GroupSummary, incorrect: &GroupSummary) -> String {
    let header = [
        "group", "n", "F mean", "F median", "O mean", "O median", "P mean", "P median", "avg mean", "avg median",
    ];
    let rows: Vec<Vec<String>> = [correct, incorrect]
        .iter()
        .map(|g| {
            let mut row = vec![g.group.as_str().to_string(), g.count.to_string()];
            for s in [&g.fidelity, &g.causal, &g.progress, &g.average] {
                row.push(f4(s.mean));
                row.push(f4(s.median));
            }
            row
        })
        .collect();
    text_table(&header, &rows)
}

pub fn sweep_json(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "tau": r.tau,
                    "precision": r.mean_precision,
                    "recall": r.mean_recall,
                    "f": r.mean_fidelity,
                    "n": r.count,
                })
            })
            .collect(),
    )
}

pub fn sweep_text(rows: &[SweepRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{:.2}", r.tau),
                f4(r.mean_precision),
                f4(r.mean_recall),
                f4(r.mean_fidelity),
                r.count.to_string(),
            ]
        })
        .collect();
    text_table(&["tau", "precision", "recall", "F", "n"], &body)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub metric: &'static str,
    pub pearson: f64,
    pub spearman: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Items present in both the scores and the ratings.
    pub n: usize,
    pub rows: Vec<CorrelationRow>,
}

/// Correlates each metric with the per-item mean rating (averaged over
/// raters). Items without a rating, or rated but unscored, are left out.
pub fn correlate(results: &[ScoredItem], ratings: &[RatingRecord]) -> Result<CorrelationReport> {
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in ratings {
        let e = sums.entry(r.item_id.as_str()).or_insert((0.0, 0));
        e.0 += r.rating;
        e.1 += 1;
    }
    let joined: Vec<(&ScoredItem, f64)> = results
        .iter()
        .filter_map(|s| sums.get(s.item_id.as_str()).map(|&(t, c)| (s, t / c as f64)))
        .collect();
    if joined.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 rated items to correlate, found {}",
            joined.len()
        )));
    }
    let human: Vec<f64> = joined.iter().map(|(_, h)| *h).collect();
    let metric = |f: fn(&ScoredItem) -> f64| -> Vec<f64> { joined.iter().map(|(s, _)| f(s)).collect() };
    let columns: [(&'static str, Vec<f64>); 4] = [
        ("f", metric(|s| s.scores.fidelity)),
        ("o", metric(|s| s.scores.causal)),
        ("p", metric(|s| s.scores.progress)),
        ("average", metric(|s| s.scores.average())),
    ];
    let mut rows = Vec::new();
    for (name, xs) in columns {
        rows.push(CorrelationRow {
            metric: name,
            pearson: pearson(&xs, &human).map_err(|e| Error::Config(format!("{name}: {e}")))?,
            spearman: spearman(&xs, &human).map_err(|e| Error::Config(format!("{name}: {e}")))?,
        });
    }
    Ok(CorrelationReport { n: joined.len(), rows })
}

pub fn correlation_json(c: &CorrelationReport) -> Value {
    json!({
        "n": c.n,
        "metrics": c.rows.iter().map(|r| json!({
            "metric": r.metric, "pearson": r.pearson, "spearman": r.spearman,
        })).collect::<Vec<_>>(),
    })
}

pub fn correlation_text(c: &CorrelationReport) -> String {
    let rows: Vec<Vec<String>> = c
        .rows
        .iter()
        .map(|r| vec![r.metric.to_string(), f4(r.pearson), f4(r.spearman), c.n.to_string()])
        .collect();
    text_table(&["metric", "pearson", "spearman", "n"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use logicality_core::LogicalityScores;

    #[test]
    fn table_alignment() {
        let t = text_table(&["k", "value"], &[vec!["long key".into(), "1".into()], vec!["a".into(), "123.5".into()]]);
        assert_eq!(t, "k         value\nlong key      1\na         123.5\n");
    }

    fn scored(id: &str, f: f64) -> ScoredItem {
        ScoredItem {
            item_id: id.into(),
            trace_len: 1,
            scores: LogicalityScores {
                precision: f,
                recall: f,
                fidelity: f,
                causal: f * f,
                progress: 1.0 - f,
                centroids: vec![],
            },
            composite: None,
            answer_verdict: None,
            flags: vec![],
        }
    }

    fn rating(id: &str, rater: &str, rating: f64) -> RatingRecord {
        RatingRecord {
            item_id: id.into(),
            rater: rater.into(),
            rating,
        }
    }

    #[test]
    fn correlate_averages_raters_and_joins_by_id() {
        let results = [scored("a", 0.2), scored("b", 0.5), scored("c", 0.9), scored("unrated", 0.1)];
        let ratings = [
            rating("a", "x", 2.0),
            rating("a", "y", 4.0),
            rating("b", "x", 5.0),
            rating("c", "x", 9.0),
            rating("ghost", "x", 1.0),
        ];
        let c = correlate(&results, &ratings).unwrap();
        assert_eq!(c.n, 3);
        let f = &c.rows[0];
        assert_eq!(f.metric, "f");
        assert!((f.spearman - 1.0).abs() < 1e-12);
        let p = &c.rows[2];
        assert!((p.spearman + 1.0).abs() < 1e-12);
        assert_eq!(correlation_text(&c).lines().count(), 5);
    }

    #[test]
    fn correlate_needs_two_items() {
        assert!(correlate(&[scored("a", 0.1)], &[rating("a", "x", 3.0)]).is_err());
    }
}
