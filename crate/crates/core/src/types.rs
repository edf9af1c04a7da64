//! Data model shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// One ground-truth reasoning step together with its importance weight in points.
#[derive(Debug, Clone, PartialEq)]
pub struct Nexus {
    pub text: String,
    pub weight: f64,
}

/// Ordered ground-truth nexuses. Index order is the derivational order.
///
/// Weights are kept in raw points; every formula divides by the total itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NexusSet {
    items: Vec<Nexus>,
}

impl NexusSet {
    pub fn new(items: Vec<Nexus>) -> Result<Self, Error> {
        if items.is_empty() {
            return Err(Error::EmptyNexusSet);
        }
        for (index, nexus) in items.iter().enumerate() {
            if nexus.text.trim().is_empty() {
                return Err(Error::EmptyNexusText { index });
            }
            if !nexus.weight.is_finite() || nexus.weight < 0.0 {
                return Err(Error::InvalidWeight {
                    index,
                    weight: nexus.weight,
                });
            }
        }
        if !items.iter().any(|n| n.weight > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[Nexus] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|n| n.text.as_str())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.items.iter().map(|n| n.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.items.iter().map(|n| n.weight).sum()
    }

    /// Same nexuses with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, Error> {
        Self::new(
            self.items
                .iter()
                .map(|n| Nexus {
                    text: n.text.clone(),
                    weight: n.weight * factor,
                })
                .collect(),
        )
    }
}

/// Where the reasoning text of a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSource {
    RawText,
    ThinkTag,
}

/// Ordered, non-empty reasoning steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningTrace {
    steps: Vec<String>,
    source: TraceSource,
}

impl ReasoningTrace {
    /// Builds a trace, trimming steps and dropping the ones that end up empty.
    pub fn new<I, S>(steps: I, source: TraceSource) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let steps = steps
            .into_iter()
            .map(Into::into)
            .filter_map(|s: String| {
                let t = s.trim();
                (!t.is_empty()).then(|| String::from(t))
            })
            .collect();
        Self { steps, source }
    }

    pub fn steps(&self) -> &[String] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> TraceSource {
        self.source
    }
}

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(alloc::format!(
                        concat!("unknown ", stringify!($name), " {:?}"),
                        other
                    )),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionType {
    /// Multiple choice problem.
    Mcp,
    CompExpression,
    CompNumeric,
    Proof,
}

string_enum!(QuestionType {
    Mcp => "MCP",
    CompExpression => "comp_expression",
    CompNumeric => "comp_numeric",
    Proof => "proof",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Difficulty {
    HighSchool,
    Undergraduate,
    Masters,
    PhD,
}

string_enum!(Difficulty {
    HighSchool => "high_school",
    Undergraduate => "undergraduate",
    Masters => "masters",
    PhD => "phd",
});

/// Outcome of judging a final answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Correct,
    Incorrect,
    Unjudged,
}

string_enum!(Verdict {
    Correct => "correct",
    Incorrect => "incorrect",
    Unjudged => "unjudged",
});

/// One benchmark record.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkItem {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub question_type: QuestionType,
    pub difficulty: Difficulty,
    pub subfield: String,
    pub nexuses: NexusSet,
}
