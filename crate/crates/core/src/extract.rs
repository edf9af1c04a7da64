//! Pulls the reasoning part out of raw model output.

use alloc::string::String;

use crate::types::TraceSource;

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";

/// Text after which a response is considered to be stating its final answer.
/// Matched case-insensitively; the earliest occurrence of any of them cuts.
pub const FINAL_ANSWER_MARKERS: &[&str] = &[
    THINK_OPEN,
    THINK_CLOSE,
    "**final answer**",
    "final answer:",
    "\\boxed{",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub text: String,
    pub source: TraceSource,
    /// A `<think>` tag was opened but never closed; everything after it was kept.
    pub unclosed_think: bool,
}

/// Returns the interior of the first `<think>…</think>` span, or, without tags,
/// the text preceding the final-answer marker (the whole text if there is none).
///
/// The result never contains a marker, which makes the function idempotent on
/// its own output.
pub fn extract_reasoning(raw: &str) -> Extraction {
    let (body, source, unclosed_think) = match raw.find(THINK_OPEN) {
        Some(open) => {
            let rest = &raw[open + THINK_OPEN.len()..];
            match rest.find(THINK_CLOSE) {
                Some(close) => (&rest[..close], TraceSource::ThinkTag, false),
                None => (rest, TraceSource::ThinkTag, true),
            }
        }
        None => (raw, TraceSource::RawText, false),
    };
    Extraction {
        text: String::from(cut_at_marker(body).trim()),
        source,
        unclosed_think,
    }
}

fn cut_at_marker(text: &str) -> &str {
    // ASCII lowercasing keeps byte offsets aligned with `text`.
    let lower = text.to_ascii_lowercase();
    let cut = FINAL_ANSWER_MARKERS
        .iter()
        .filter_map(|m| lower.find(m))
        .min()
        .unwrap_or(text.len());
    &text[..cut]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_interior() {
        let e = extract_reasoning("<think>step A. step B.</think>\\boxed{C}");
        assert_eq!(e.text, "step A. step B.");
        assert_eq!(e.source, TraceSource::ThinkTag);
        assert!(!e.unclosed_think);
    }

    #[test]
    fn identity_fallback() {
        let e = extract_reasoning("no tags here.");
        assert_eq!(e.text, "no tags here.");
        assert_eq!(e.source, TraceSource::RawText);
    }

    #[test]
    fn first_span_wins() {
        assert_eq!(extract_reasoning("<think>x</think><think>y</think>").text, "x");
    }

    #[test]
    fn unclosed_tag_keeps_tail_and_flags() {
        let e = extract_reasoning("prompt echo <think>we start here. and go on");
        assert_eq!(e.text, "we start here. and go on");
        assert!(e.unclosed_think);
    }

    #[test]
    fn orphan_close_tag_cuts() {
        let e = extract_reasoning("reasoning goes here.</think> The answer is B.");
        assert_eq!(e.text, "reasoning goes here.");
        assert_eq!(e.source, TraceSource::RawText);
    }

    #[test]
    fn final_answer_marker_cuts() {
        assert_eq!(
            extract_reasoning("Compute it. Final Answer: 42").text,
            "Compute it."
        );
        assert_eq!(
            extract_reasoning("So the value is 0.527. Thus \\boxed{0.527}").text,
            "So the value is 0.527. Thus"
        );
    }
}
