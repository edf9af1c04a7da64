//! Rule-based final-answer extraction and multiple-choice judging.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::types::Verdict;

const BOXED: &str = "\\boxed";

/// Interior of the last balanced `\boxed{...}` group, trimmed.
pub fn extract_boxed(answer_text: &str) -> Option<String> {
    let mut found = None;
    let mut search = 0;
    while let Some(rel) = answer_text[search..].find(BOXED) {
        let start = search + rel;
        let after = start + BOXED.len();
        search = after;
        let rest = &answer_text[after..];
        let skipped = rest.len() - rest.trim_start().len();
        let open = after + skipped;
        if answer_text[open..].starts_with('{') {
            if let Some(close) = matching_brace(answer_text, open) {
                found = Some(answer_text[open + 1..close].trim());
            }
        }
    }
    found.map(String::from)
}

/// Byte index of the `}` closing the `{` at `open`.
fn matching_brace(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut escaped = false;
    for (i, c) in s[open..].char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

/// First standalone option letter A-D after LaTeX command names are removed.
pub fn choice_letter(content: &str) -> Option<char> {
    let chars = strip_commands(content);
    (0..chars.len()).find_map(|i| {
        let c = chars[i].to_ascii_uppercase();
        let standalone = (i == 0 || !chars[i - 1].is_alphanumeric())
            && chars.get(i + 1).is_none_or(|n| !n.is_alphanumeric());
        (matches!(c, 'A'..='D') && standalone).then_some(c)
    })
}

fn strip_commands(content: &str) -> Vec<char> {
    let src: Vec<char> = content.chars().collect();
    let mut out = Vec::with_capacity(src.len());
    let mut i = 0;
    while i < src.len() {
        if src[i] == '\\' {
            let mut k = i + 1;
            while k < src.len() && src[k].is_ascii_alphabetic() {
                k += 1;
            }
            out.push(' ');
            i = if k == i + 1 { i + 2 } else { k };
        } else {
            out.push(src[i]);
            i += 1;
        }
    }
    out
}

fn gold_letter(gold: &str) -> Result<char, Error> {
    let inner = extract_boxed(gold).unwrap_or_else(|| String::from(gold));
    let stripped: String = strip_commands(&inner)
        .into_iter()
        .filter(|c| !matches!(c, '{' | '}' | '(' | ')' | '.' | ':') && !c.is_whitespace())
        .collect();
    let mut it = stripped.chars();
    match (it.next(), it.next()) {
        (Some(c), None) if matches!(c.to_ascii_uppercase(), 'A'..='D') => Ok(c.to_ascii_uppercase()),
        _ => Err(Error::InvalidGold(String::from(gold))),
    }
}

/// Correct iff the boxed choice in `predicted` equals the gold letter.
/// A response without a boxed answer is incorrect.
pub fn judge_mcq(predicted: &str, gold: &str) -> Result<Verdict, Error> {
    let gold = gold_letter(gold)?;
    let verdict = match extract_boxed(predicted).as_deref().and_then(choice_letter) {
        Some(letter) if letter == gold => Verdict::Correct,
        _ => Verdict::Incorrect,
    };
    Ok(verdict)
}
