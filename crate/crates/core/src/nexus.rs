//! Parsing of scoring-point lines such as `"3. Integrate over t (15 points)"`.

use alloc::string::String;

use crate::error::Error;

/// A nexus line split into its text and the optional `(x points)` weight.
#[derive(Debug, Clone, PartialEq)]
pub struct NexusLine {
    pub text: String,
    pub weight: Option<f64>,
}

/// Strips an optional leading `k.` / `k)` list number and captures a trailing
/// `(<number> point[s])` group (case-insensitive).
///
/// `index` is only used to label errors. A negative weight is rejected; a
/// missing suffix yields `weight: None` and the caller picks the default.
pub fn parse_nexus_line(line: &str, index: usize) -> Result<NexusLine, Error> {
    let mut text = strip_numbering(line.trim());
    let mut weight = None;

    if let Some((head, value)) = split_points_suffix(text) {
        if value < 0.0 || !value.is_finite() {
            return Err(Error::InvalidWeight {
                index,
                weight: value,
            });
        }
        text = head;
        weight = Some(value);
    }

    let text = text.trim();
    if text.is_empty() {
        return Err(Error::EmptyNexusText { index });
    }
    Ok(NexusLine {
        text: String::from(text),
        weight,
    })
}

fn strip_numbering(s: &str) -> &str {
    let digits = s.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return s;
    }
    let rest = &s[digits..];
    match rest.as_bytes().first() {
        Some(b'.') | Some(b')') => {
            let after = &rest[1..];
            // "1.5 m/s is ..." is a number, not list numbering.
            if after.is_empty() || after.starts_with(char::is_whitespace) {
                after.trim_start()
            } else {
                s
            }
        }
        _ => s,
    }
}

fn split_points_suffix(s: &str) -> Option<(&str, f64)> {
    let body = s.strip_suffix(')')?;
    let open = body.rfind('(')?;
    let inner = body[open + 1..].trim();
    let lower = inner.to_ascii_lowercase();
    let number = if let Some(n) = lower.strip_suffix("points") {
        n
    } else {
        lower.strip_suffix("point")?
    };
    let number = number.trim();
    if number.is_empty() {
        return None;
    }
    let value: f64 = number.parse().ok()?;
    Some((&body[..open], value))
}
