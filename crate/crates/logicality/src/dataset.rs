//! JSONL ingestion and emission: benchmark items, responses, score records
//! and external ratings.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use logicality_core::{
    parse_nexus_line, BenchmarkItem, LogicalityScores, Nexus, NexusSet, ScoredItem, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::{numbered_lines, read_to_string, write_atomic};

/// One dataset line: the benchmark item plus optional inline model output.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub item: BenchmarkItem,
    pub response: Option<String>,
    /// Externally supplied verdict; overrides rule-based judging.
    pub answer_verdict: Option<Verdict>,
    /// Some nexus line had no "(x points)" suffix and got weight 1.
    pub default_weight: bool,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    question: String,
    answer: String,
    question_type: String,
    difficulty: String,
    subfield: String,
    nexuses: Vec<RawNexus>,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    answer_verdict: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNexus {
    Line(String),
    Object { text: String, weight: Option<f64> },
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    question: &'a str,
    answer: &'a str,
    question_type: &'a str,
    difficulty: &'a str,
    subfield: &'a str,
    nexuses: Vec<OutNexus<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    answer_verdict: Option<&'a str>,
}

#[derive(Serialize)]
struct OutNexus<'a> {
    text: &'a str,
    weight: f64,
}

pub fn parse_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    parse_dataset_str(&read_to_string(path)?, path)
}

/// `origin` only labels error messages.
pub fn parse_dataset_str(text: &str, origin: &Path) -> Result<Vec<DatasetRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line_no, line) in numbered_lines(text) {
        let rec = parse_record(line).map_err(|msg| Error::parse(origin, line_no, msg))?;
        if !seen.insert(rec.item.id.clone()) {
            return Err(Error::parse(origin, line_no, format!("duplicate id {:?}", rec.item.id)));
        }
        out.push(rec);
    }
    Ok(out)
}

fn parse_record(line: &str) -> Result<DatasetRecord, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.id.trim().is_empty() {
        return Err("empty id".into());
    }
    let question_type = raw.question_type.parse()?;
    let difficulty = raw.difficulty.parse()?;
    let answer_verdict = raw
        .answer_verdict
        .map(|v| v.parse::<Verdict>())
        .transpose()?;

    let mut default_weight = false;
    let mut items = Vec::with_capacity(raw.nexuses.len());
    for (index, n) in raw.nexuses.into_iter().enumerate() {
        let nexus = match n {
            RawNexus::Line(line) => {
                let parsed = parse_nexus_line(&line, index).map_err(|e| e.to_string())?;
                let weight = parsed.weight.unwrap_or_else(|| {
                    default_weight = true;
                    1.0
                });
                Nexus {
                    text: parsed.text,
                    weight,
                }
            }
            RawNexus::Object { text, weight } => {
                let weight = weight.ok_or_else(|| format!("nexus {index} has no weight"))?;
                Nexus {
                    text: text.trim().to_string(),
                    weight,
                }
            }
        };
        items.push(nexus);
    }
    let nexuses = NexusSet::new(items).map_err(|e| e.to_string())?;

    Ok(DatasetRecord {
        item: BenchmarkItem {
            id: raw.id,
            question: raw.question,
            answer: raw.answer,
            question_type,
            difficulty,
            subfield: raw.subfield,
            nexuses,
        },
        response: raw.response,
        answer_verdict,
        default_weight,
    })
}

/// Emits records in the object-nexus form, which re-parses to equal values.
pub fn write_dataset(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    write_atomic(path, |w| {
        for r in records {
            writeln!(w, "{}", dataset_line(r))?;
        }
        Ok(())
    })
}

pub fn dataset_line(r: &DatasetRecord) -> String {
    let item = &r.item;
    let out = OutRecord {
        id: &item.id,
        question: &item.question,
        answer: &item.answer,
        question_type: item.question_type.as_str(),
        difficulty: item.difficulty.as_str(),
        subfield: &item.subfield,
        nexuses: item
            .nexuses
            .items()
            .iter()
            .map(|n| OutNexus {
                text: &n.text,
                weight: n.weight,
            })
            .collect(),
        response: r.response.as_deref(),
        answer_verdict: r.answer_verdict.map(Verdict::as_str),
    };
    serde_json::to_string(&out).expect("record serializes")
}

#[derive(Deserialize)]
struct RawResponse {
    id: String,
    response: String,
}

/// Responses JSONL `{"id", "response"}` keyed by id.
pub fn parse_responses(path: &Path) -> Result<HashMap<String, String>> {
    let text = read_to_string(path)?;
    let mut out = HashMap::new();
    for (line_no, line) in numbered_lines(&text) {
        let r: RawResponse = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if out.insert(r.id.clone(), r.response).is_some() {
            return Err(Error::parse(path, line_no, format!("duplicate id {:?}", r.id)));
        }
    }
    Ok(out)
}

fn real(x: f64) -> String {
    format!("{x:.6}")
}

/// One score line. Field order: id, m, precision, recall, f, o, p,
/// composite, answer_verdict, then `flags` only when non-empty.
pub fn score_line(r: &ScoredItem) -> String {
    let mut s = String::with_capacity(160);
    let _ = write!(
        s,
        "{{\"id\":{},\"m\":{},\"precision\":{},\"recall\":{},\"f\":{},\"o\":{},\"p\":{},\"composite\":{},\"answer_verdict\":{}",
        serde_json::to_string(&r.item_id).expect("string serializes"),
        r.trace_len,
        real(r.scores.precision),
        real(r.scores.recall),
        real(r.scores.fidelity),
        real(r.scores.causal),
        real(r.scores.progress),
        r.composite.map_or_else(|| "null".to_string(), real),
        r.answer_verdict
            .map_or_else(|| "null".to_string(), |v| format!("\"{}\"", v.as_str())),
    );
    if !r.flags.is_empty() {
        let _ = write!(s, ",\"flags\":{}", serde_json::to_string(&r.flags).expect("strings serialize"));
    }
    s.push('}');
    s
}

pub fn write_scores(path: &Path, results: &[ScoredItem]) -> Result<()> {
    write_atomic(path, |w| {
        for r in results {
            writeln!(w, "{}", score_line(r))?;
        }
        Ok(())
    })
}

#[derive(Deserialize)]
struct RawScore {
    id: String,
    m: usize,
    precision: f64,
    recall: f64,
    f: f64,
    o: f64,
    p: f64,
    composite: Option<f64>,
    answer_verdict: Option<String>,
    #[serde(default)]
    flags: Vec<String>,
}

/// Reads a score file back. Centroids are not part of the format and come
/// back empty.
pub fn read_scores(path: &Path) -> Result<Vec<ScoredItem>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (line_no, line) in numbered_lines(&text) {
        let raw: RawScore = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let answer_verdict = raw
            .answer_verdict
            .map(|v| v.parse::<Verdict>())
            .transpose()
            .map_err(|e| Error::parse(path, line_no, e))?;
        out.push(ScoredItem {
            item_id: raw.id,
            trace_len: raw.m,
            scores: LogicalityScores {
                precision: raw.precision,
                recall: raw.recall,
                fidelity: raw.f,
                causal: raw.o,
                progress: raw.p,
                centroids: Vec::new(),
            },
            composite: raw.composite,
            answer_verdict,
            flags: raw.flags,
        });
    }
    Ok(out)
}

/// One external logicality rating on the 1 to 10 scale.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RatingRecord {
    #[serde(alias = "id")]
    pub item_id: String,
    pub rater: String,
    pub rating: f64,
}

pub fn read_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (line_no, line) in numbered_lines(&text) {
        let r: RatingRecord = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if !(1.0..=10.0).contains(&r.rating) {
            return Err(Error::parse(path, line_no, format!("rating {} outside 1..=10", r.rating)));
        }
        out.push(r);
    }
    Ok(out)
}
