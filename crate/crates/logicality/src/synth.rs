//! Seeded synthetic benchmark items with traces of known structure.
//!
//! Nexus texts are sentences of pseudo-words, so two different nexuses share
//! almost no features under the hash embedder while a trace step copied or
//! paraphrased from a nexus stays close to it.

use logicality_core::{BenchmarkItem, Difficulty, Nexus, NexusSet, QuestionType, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DatasetRecord;

const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const CONNECTIVES: &[&str] = &["So", "Next", "Then", "Now", "Hence", "Thus"];
const SUBFIELDS: &[&str] = &["mechanics", "optics", "thermodynamics", "electromagnetism", "quantum"];
const LETTERS: &[&str] = &["A", "B", "C", "D"];

/// How a trace relates to its nexuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStyle {
    /// Nexus texts verbatim, in order.
    Verbatim,
    /// Nexus texts verbatim, last to first.
    Reversed,
    /// Each nexus lightly reworded, in order.
    Paraphrased,
    /// Paraphrased, with one adjacent pair of steps swapped.
    LocalSwap,
    /// Paraphrased, with unrelated sentences inserted.
    NoisePadded,
    /// Paraphrased, covering only the first half of the nexuses.
    Partial,
    /// Paraphrased, with some steps repeated.
    Looping,
    /// Paraphrased, in random order.
    Shuffled,
    /// Random order plus unrelated sentences.
    ShuffledNoisy,
    /// Random order, a third of the nexuses dropped, some steps repeated.
    Degraded,
    /// No reasoning at all.
    Empty,
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn word(&mut self) -> String {
        let syllables = self.rng.random_range(2..=3);
        let mut w = String::with_capacity(syllables * 2);
        for _ in 0..syllables {
            w.push(CONSONANTS[self.rng.random_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[self.rng.random_range(0..VOWELS.len())] as char);
        }
        w
    }

    /// A capitalized sentence of `words` pseudo-words ending in a period.
    pub fn sentence(&mut self, words: usize) -> String {
        let ws: Vec<String> = (0..words.max(2)).map(|_| self.word()).collect();
        capitalize(&format!("{}.", ws.join(" ")))
    }

    /// Integer point weights in `1..` summing to 100.
    pub fn weights(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<u32> = (0..n).map(|_| self.rng.random_range(1..=10)).collect();
        let total: u32 = raw.iter().sum();
        let mut w: Vec<u32> = raw.iter().map(|&r| (r * 100 / total).max(1)).collect();
        let sum: u32 = w.iter().sum();
        let k = (0..n).max_by_key(|&i| (w[i], std::cmp::Reverse(i))).unwrap_or(0);
        w[k] = (w[k] + 100).saturating_sub(sum).max(1);
        w.into_iter().map(f64::from).collect()
    }

    pub fn nexuses(&mut self, n: usize) -> NexusSet {
        let weights = self.weights(n);
        let items = weights
            .into_iter()
            .map(|weight| {
                let len = self.rng.random_range(5..=7);
                Nexus {
                    text: self.sentence(len),
                    weight,
                }
            })
            .collect();
        NexusSet::new(items).expect("generated nexuses are valid")
    }

    /// Drops one non-initial word and prefixes a connective.
    pub fn paraphrase(&mut self, text: &str) -> String {
        let body = text.trim_end_matches('.');
        let mut words: Vec<&str> = body.split_whitespace().collect();
        if words.len() > 3 {
            let k = self.rng.random_range(1..words.len());
            words.remove(k);
        }
        let first = words[0].to_lowercase();
        let rest = words[1..].join(" ");
        let lead = CONNECTIVES[self.rng.random_range(0..CONNECTIVES.len())];
        format!("{lead} {first} {rest}.")
    }

    pub fn trace_steps(&mut self, nexuses: &NexusSet, style: TraceStyle) -> Vec<String> {
        let texts: Vec<String> = nexuses.texts().map(str::to_string).collect();
        let n = texts.len();
        let para = |g: &mut Self, idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| g.paraphrase(&texts[i])).collect() };
        let order: Vec<usize> = (0..n).collect();
        match style {
            TraceStyle::Verbatim => texts.clone(),
            TraceStyle::Reversed => texts.iter().rev().cloned().collect(),
            TraceStyle::Paraphrased => para(self, &order),
            TraceStyle::LocalSwap => {
                let mut o = order;
                if n > 1 {
                    let k = self.rng.random_range(0..n - 1);
                    o.swap(k, k + 1);
                }
                para(self, &o)
            }
            TraceStyle::NoisePadded => {
                let mut steps = para(self, &order);
                self.insert_noise(&mut steps, 1 + n / 3);
                steps
            }
            TraceStyle::Partial => para(self, &order[..n.div_ceil(2)]),
            TraceStyle::Looping => {
                let mut steps = para(self, &order);
                let repeats = 1 + n / 3;
                for _ in 0..repeats {
                    let k = self.rng.random_range(0..steps.len());
                    let copy = steps[k].clone();
                    steps.insert(k + 1, copy);
                }
                steps
            }
            TraceStyle::Shuffled => {
                let mut o = order;
                o.shuffle(&mut self.rng);
                para(self, &o)
            }
            TraceStyle::ShuffledNoisy => {
                let mut o = order;
                o.shuffle(&mut self.rng);
                let mut steps = para(self, &o);
                self.insert_noise(&mut steps, 1 + n / 2);
                steps
            }
            TraceStyle::Degraded => {
                let mut o = order;
                o.shuffle(&mut self.rng);
                o.truncate((2 * n).div_ceil(3).max(1));
                let mut steps = para(self, &o);
                for _ in 0..(1 + n / 3) {
                    let k = self.rng.random_range(0..steps.len());
                    let copy = steps[k].clone();
                    steps.insert(k + 1, copy);
                }
                steps
            }
            TraceStyle::Empty => Vec::new(),
        }
    }

    fn insert_noise(&mut self, steps: &mut Vec<String>, count: usize) {
        for _ in 0..count {
            let len = self.rng.random_range(5..=7);
            let s = self.sentence(len);
            let at = self.rng.random_range(0..=steps.len());
            steps.insert(at, s);
        }
    }

    /// A full record: `<think>` trace, then a boxed letter answer.
    pub fn record(&mut self, id: String, n: usize, style: TraceStyle, answer_correct: bool) -> DatasetRecord {
        let nexuses = self.nexuses(n);
        let steps = self.trace_steps(&nexuses, style);
        let gold = LETTERS[self.rng.random_range(0..LETTERS.len())];
        let given = if answer_correct {
            gold
        } else {
            let others: Vec<&str> = LETTERS.iter().copied().filter(|l| *l != gold).collect();
            others[self.rng.random_range(0..others.len())]
        };
        let response = format!("<think>{}</think>\n\n**Final Answer:** \\boxed{{\\text{{{given}}}}}", steps.join(" "));
        let difficulty = Difficulty::ALL[self.rng.random_range(0..Difficulty::ALL.len())];
        let subfield = SUBFIELDS[self.rng.random_range(0..SUBFIELDS.len())];
        let question = self.sentence(8).replace('.', "?");
        DatasetRecord {
            item: BenchmarkItem {
                id,
                question,
                answer: gold.to_string(),
                question_type: QuestionType::Mcp,
                difficulty,
                subfield: subfield.to_string(),
                nexuses,
            },
            response: Some(response),
            answer_verdict: None,
            default_weight: false,
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// The twelve shipped items, one per trace behaviour worth pinning down.
pub fn fixture_items() -> Vec<DatasetRecord> {
    let plan: [(TraceStyle, usize, bool); 12] = [
        (TraceStyle::Verbatim, 4, true),
        (TraceStyle::Verbatim, 6, true),
        (TraceStyle::Reversed, 4, false),
        (TraceStyle::Paraphrased, 5, true),
        (TraceStyle::LocalSwap, 5, true),
        (TraceStyle::NoisePadded, 5, true),
        (TraceStyle::Partial, 6, false),
        (TraceStyle::Looping, 5, true),
        (TraceStyle::Shuffled, 6, false),
        (TraceStyle::ShuffledNoisy, 5, false),
        (TraceStyle::Degraded, 6, false),
        (TraceStyle::Empty, 3, false),
    ];
    let mut g = Generator::new(12);
    let mut out: Vec<DatasetRecord> = plan
        .iter()
        .enumerate()
        .map(|(k, &(style, n, ok))| g.record(format!("fx-{:02}", k + 1), n, style, ok))
        .collect();
    // Variety for the report groupings and the response-handling paths.
    out[3].item.question_type = QuestionType::CompNumeric;
    out[3].item.answer = "0.527".into();
    out[3].answer_verdict = Some(Verdict::Correct);
    out[7].item.question_type = QuestionType::Proof;
    out[9].response = out[9].response.as_ref().map(|r| r.replace("</think>", ""));
    out
}

/// `(style, share out of 100)` for the 100-item fixture corpus: mostly
/// in-order traces, with one in five carrying an ordering error.
pub const CORPUS_MIX: &[(TraceStyle, usize)] = &[
    (TraceStyle::Paraphrased, 45),
    (TraceStyle::NoisePadded, 15),
    (TraceStyle::Partial, 10),
    (TraceStyle::Looping, 10),
    (TraceStyle::LocalSwap, 12),
    (TraceStyle::Shuffled, 4),
    (TraceStyle::ShuffledNoisy, 4),
];

pub fn fixture_corpus() -> Vec<DatasetRecord> {
    let mut g = Generator::new(100);
    let mut out = Vec::with_capacity(100);
    for &(style, count) in CORPUS_MIX {
        for _ in 0..count {
            let n = g.rng().random_range(3..=10);
            let id = format!("fc-{:03}", out.len() + 1);
            out.push(g.record(id, n, style, true));
        }
    }
    out
}

/// Correct items carry aligned traces, Incorrect items shuffled and
/// noise-padded ones; verdicts are set on the records.
pub fn study_corpus(seed: u64, items: usize) -> Vec<DatasetRecord> {
    let mut g = Generator::new(seed);
    (0..items)
        .map(|k| {
            let correct = k % 2 == 0;
            let n = g.rng().random_range(3..=8);
            let style = if correct {
                TraceStyle::Paraphrased
            } else {
                TraceStyle::ShuffledNoisy
            };
            let mut r = g.record(format!("st-{k:05}"), n, style, correct);
            r.answer_verdict = Some(if correct { Verdict::Correct } else { Verdict::Incorrect });
            r
        })
        .collect()
}

/// Half clean in-order traces, half degraded ones (shuffled, incomplete,
/// looping), interleaved.
pub fn quality_corpus(seed: u64, items: usize) -> Vec<DatasetRecord> {
    let mut g = Generator::new(seed);
    (0..items)
        .map(|k| {
            let good = k % 2 == 0;
            let n = g.rng().random_range(4..=8);
            let style = if good { TraceStyle::Paraphrased } else { TraceStyle::Degraded };
            g.record(format!("qc-{k:05}"), n, style, good)
        })
        .collect()
}

/// Dataset lines in the string form `"k. text (w points)"`.
pub fn string_form_line(r: &DatasetRecord) -> String {
    let nexuses: Vec<String> = r
        .item
        .nexuses
        .items()
        .iter()
        .enumerate()
        .map(|(k, n)| format!("{}. {} ({} points)", k + 1, n.text, n.weight))
        .collect();
    let mut v = serde_json::json!({
        "id": r.item.id,
        "question": r.item.question,
        "answer": r.item.answer,
        "question_type": r.item.question_type.as_str(),
        "difficulty": r.item.difficulty.as_str(),
        "subfield": r.item.subfield,
        "nexuses": nexuses,
    });
    if let Some(resp) = &r.response {
        v["response"] = resp.clone().into();
    }
    if let Some(verdict) = r.answer_verdict {
        v["answer_verdict"] = verdict.as_str().into();
    }
    v.to_string()
}
