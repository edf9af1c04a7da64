//! Math-aware, rule-based sentence segmentation of reasoning text.
//!
//! A step boundary is placed after a run of `.`, `?` or `!` (plus any closing
//! quotes or brackets) when all of these hold:
//!
//! 1. the terminator lies outside every math span;
//! 2. a `.` does not sit between two digits;
//! 3. a `.` does not close a configured abbreviation;
//! 4. what follows is the end of text, or whitespace and then an uppercase
//!    letter, a digit, or the opening of a math span.
//!
//! Blank lines outside math also end a step. Fragments shorter than
//! `min_step_chars` are merged into the next step (or the previous one when
//! they come last).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::types::{ReasoningTrace, TraceSource};

pub const DEFAULT_MIN_STEP_CHARS: usize = 12;

pub const DEFAULT_ABBREVIATIONS: &[&str] = &["e.g", "i.e", "Eq", "Fig", "Dr", "et al", "vs"];

pub const DEFAULT_MATH_DELIMITERS: &[(&str, &str)] =
    &[("$$", "$$"), ("\\[", "\\]"), ("\\(", "\\)"), ("$", "$")];

#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterConfig {
    pub min_step_chars: usize,
    pub abbreviations: Vec<String>,
    pub math_delimiters: Vec<(String, String)>,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            min_step_chars: DEFAULT_MIN_STEP_CHARS,
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            math_delimiters: DEFAULT_MATH_DELIMITERS
                .iter()
                .map(|(o, c)| (o.to_string(), c.to_string()))
                .collect(),
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.min_step_chars == 0 {
            return Err(Error::InvalidConfig("min_step_chars must be at least 1"));
        }
        for (i, (open, close)) in self.math_delimiters.iter().enumerate() {
            if open.is_empty() || close.is_empty() {
                return Err(Error::InvalidConfig("math delimiters must be non-empty"));
            }
            if self.math_delimiters[..i].iter().any(|(o, c)| o == open && c == close) {
                return Err(Error::InvalidConfig("math delimiter pairs must be distinct"));
            }
        }
        Ok(())
    }
}

/// Splits `text` into sentence-level steps. Empty or blank input yields an
/// empty trace.
pub fn segment(text: &str, cfg: &SegmenterConfig) -> ReasoningTrace {
    let chars: Vec<char> = text.chars().collect();
    let delimiters = sorted_delimiters(cfg);
    let math = math_mask(&chars, &delimiters);
    let abbreviations: Vec<Vec<char>> = cfg
        .abbreviations
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| a.chars().flat_map(char::to_lowercase).collect())
        .collect();

    let mut breaks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if math[i] {
            i += 1;
            continue;
        }
        match chars[i] {
            '.' | '?' | '!' => {
                let mut end = i;
                while end + 1 < chars.len() && is_terminator(chars[end + 1]) && !math[end + 1] {
                    end += 1;
                }
                let mut tail = end;
                while tail + 1 < chars.len() && is_closer(chars[tail + 1]) && !math[tail + 1] {
                    tail += 1;
                }
                if is_boundary(&chars, i, end, tail, &abbreviations, &delimiters) {
                    breaks.push(tail + 1);
                    i = tail + 1;
                } else {
                    i = end + 1;
                }
            }
            '\n' => {
                let mut k = i + 1;
                while k < chars.len() && !math[k] && chars[k] != '\n' && chars[k].is_whitespace() {
                    k += 1;
                }
                if k < chars.len() && chars[k] == '\n' && !math[k] {
                    breaks.push(i);
                    i = k + 1;
                } else {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }

    let mut fragments = Vec::with_capacity(breaks.len() + 1);
    let mut start = 0;
    for b in breaks.into_iter().chain(core::iter::once(chars.len())) {
        let piece = collapse_whitespace(&chars[start..b]);
        if !piece.is_empty() {
            fragments.push(piece);
        }
        start = b;
    }

    ReasoningTrace::new(merge_short(fragments, cfg.min_step_chars.max(1)), TraceSource::RawText)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_boundary(
    chars: &[char],
    start: usize,
    end: usize,
    tail: usize,
    abbreviations: &[Vec<char>],
    delimiters: &[(Vec<char>, Vec<char>)],
) -> bool {
    let next = chars.get(end + 1).copied();
    if start == end && chars[start] == '.' {
        let prev_digit = start > 0 && chars[start - 1].is_ascii_digit();
        if prev_digit && next.is_some_and(|c| c.is_ascii_digit()) {
            return false;
        }
        if ends_with_abbreviation(&chars[..start], abbreviations) {
            return false;
        }
    }

    let after = tail + 1;
    if after == chars.len() {
        return true;
    }
    if !chars[after].is_whitespace() {
        return false;
    }
    let mut k = after;
    while k < chars.len() && chars[k].is_whitespace() {
        k += 1;
    }
    if k == chars.len() {
        return true;
    }
    let c = chars[k];
    c.is_uppercase() || c.is_ascii_digit() || delimiters.iter().any(|(open, _)| chars[k..].starts_with(open))
}

fn ends_with_abbreviation(prefix: &[char], abbreviations: &[Vec<char>]) -> bool {
    abbreviations.iter().any(|abbr| {
        if abbr.len() > prefix.len() {
            return false;
        }
        let at = prefix.len() - abbr.len();
        let matches = prefix[at..]
            .iter()
            .zip(abbr)
            .all(|(&p, &a)| p.to_lowercase().eq(core::iter::once(a)));
        matches && (at == 0 || !prefix[at - 1].is_alphanumeric())
    })
}

fn sorted_delimiters(cfg: &SegmenterConfig) -> Vec<(Vec<char>, Vec<char>)> {
    let mut out: Vec<(Vec<char>, Vec<char>)> = cfg
        .math_delimiters
        .iter()
        .filter(|(o, c)| !o.is_empty() && !c.is_empty())
        .map(|(o, c)| (o.chars().collect(), c.chars().collect()))
        .collect();
    // Longest opener first so "$$" is tried before "$".
    out.sort_by_key(|e| core::cmp::Reverse(e.0.len()));
    out
}

/// Marks every char that belongs to a closed math span (delimiters included).
/// An opener without a matching closer is literal text. `\$` never delimits.
fn math_mask(chars: &[char], delimiters: &[(Vec<char>, Vec<char>)]) -> Vec<bool> {
    let mut mask = alloc::vec![false; chars.len()];
    let mut i = 0;
    'scan: while i < chars.len() {
        if chars[i] == '\\' && chars.get(i + 1) == Some(&'$') {
            i += 2;
            continue;
        }
        for (open, close) in delimiters {
            if chars[i..].starts_with(open) {
                if let Some(k) = find_close(chars, i + open.len(), close) {
                    let end = k + close.len();
                    mask[i..end].iter_mut().for_each(|m| *m = true);
                    i = end;
                    continue 'scan;
                }
            }
        }
        i += 1;
    }
    mask
}

fn find_close(chars: &[char], from: usize, close: &[char]) -> Option<usize> {
    let mut k = from;
    while k + close.len() <= chars.len() {
        if chars[k] == '\\' && close[0] == '$' && chars.get(k + 1) == Some(&'$') {
            k += 2;
            continue;
        }
        if chars[k..].starts_with(close) {
            return Some(k);
        }
        k += 1;
    }
    None
}

fn collapse_whitespace(chars: &[char]) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for &c in chars {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

fn merge_short(fragments: Vec<String>, min_chars: usize) -> Vec<String> {
    let mut steps: Vec<String> = Vec::with_capacity(fragments.len());
    let mut carry: Option<String> = None;
    for fragment in fragments {
        let current = match carry.take() {
            Some(mut c) => {
                c.push(' ');
                c.push_str(&fragment);
                c
            }
            None => fragment,
        };
        if current.chars().count() < min_chars {
            carry = Some(current);
        } else {
            steps.push(current);
        }
    }
    if let Some(rest) = carry {
        match steps.last_mut() {
            Some(last) => {
                last.push(' ');
                last.push_str(&rest);
            }
            None => steps.push(rest),
        }
    }
    steps
}
