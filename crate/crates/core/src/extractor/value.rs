//! Number recognition and rendering.

use std::str::FromStr;

use crate::text::is_word_char;
use crate::types::{Decimal, Span};

/// A recognised number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedValue {
    /// Standardized value, magnitude applied, normalized.
    pub value: Decimal,
    pub span: Span,
    pub negative: bool,
    pub grouped: bool,
    pub fractional: bool,
    pub magnitude: Option<Decimal>,
}

impl ParsedValue {
    /// Only digits: no sign, separators, fraction or magnitude.
    pub fn is_plain_integer(&self) -> bool {
        !self.negative && !self.grouped && !self.fractional && self.magnitude.is_none()
    }
}

fn magnitude_of(word: &str, attached: bool) -> Option<Decimal> {
    let w = word.to_ascii_lowercase();
    let m: i64 = match w.as_str() {
        "thousand" => 1_000,
        "million" | "mn" => 1_000_000,
        "billion" | "bn" => 1_000_000_000,
        "trillion" | "tn" => 1_000_000_000_000,
        // single letters only when glued to the digits: "6k", "5m"
        "k" if attached => 1_000,
        "m" if attached => 1_000_000,
        _ => return None,
    };
    Some(Decimal::from(m))
}

fn char_before(text: &str, pos: usize) -> Option<char> {
    text[..pos].chars().next_back()
}

fn char_at(text: &str, pos: usize) -> Option<char> {
    text[pos..].chars().next()
}

fn digits_end(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    i
}

/// Recognises a number starting exactly at byte `pos`.
///
/// Accepts plain integers and decimals, comma digit grouping ("10,000,000"),
/// a leading minus sign, and a magnitude word either glued ("6k", "2bn") or
/// after whitespace ("1.5 million"). Returns `None` when `pos` is not the
/// start of a standalone number, e.g. inside "A14" or "COVID-19".
pub fn parse_value(text: &str, pos: usize) -> Option<ParsedValue> {
    if pos >= text.len() || !text.is_char_boundary(pos) {
        return None;
    }
    let bytes = text.as_bytes();
    let mut i = pos;
    let negative = bytes[i] == b'-';
    if negative {
        i += 1;
    }
    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
        return None;
    }
    if let Some(prev) = char_before(text, pos) {
        if is_word_char(prev) || prev == '.' || prev == ',' {
            return None;
        }
        if prev == '-' || prev == '−' {
            // hyphen glued to a word: "COVID-19"
            let before = char_before(text, pos - prev.len_utf8());
            if before.is_some_and(is_word_char) || negative {
                return None;
            }
        }
    }

    let int_start = i;
    let first_end = digits_end(bytes, i);
    let mut end = first_end;
    let mut grouped = false;
    if first_end - int_start <= 3 {
        let mut j = first_end;
        while j + 4 <= bytes.len()
            && bytes[j] == b','
            && bytes[j + 1..j + 4].iter().all(u8::is_ascii_digit)
            && !(j + 4 < bytes.len() && bytes[j + 4].is_ascii_digit())
        {
            j += 4;
            grouped = true;
        }
        end = j;
    }
    let mut fractional = false;
    if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
        end = digits_end(bytes, end + 1);
        fractional = true;
    }
    let literal: String = text[int_start..end].chars().filter(|&c| c != ',').collect();
    let mut value = Decimal::from_str_exact(&literal)
        .or_else(|_| Decimal::from_str(&literal))
        .ok()?;
    if negative {
        value = -value;
    }

    // magnitude, glued or after whitespace
    let mut magnitude = None;
    let word_at = |start: usize| -> (usize, &str) {
        let len = text[start..]
            .char_indices()
            .find(|&(_, c)| !c.is_alphabetic())
            .map_or(text.len() - start, |(k, _)| k);
        (start + len, &text[start..start + len])
    };
    let (glued_end, glued) = word_at(end);
    if !glued.is_empty() {
        if let Some(m) = magnitude_of(glued, true) {
            if !char_at(text, glued_end).is_some_and(is_word_char) {
                magnitude = Some(m);
                end = glued_end;
            }
        }
    } else {
        let ws = text[end..]
            .char_indices()
            .find(|&(_, c)| !c.is_whitespace())
            .map_or(text.len() - end, |(k, _)| k);
        if ws > 0 {
            let (word_end, word) = word_at(end + ws);
            if let Some(m) = magnitude_of(word, false) {
                if !char_at(text, word_end).is_some_and(is_word_char) {
                    magnitude = Some(m);
                    end = word_end;
                }
            }
        }
    }
    if let Some(m) = magnitude {
        value = value.checked_mul(m)?;
    }
    Some(ParsedValue {
        value: value.normalize(),
        span: Span::new(pos, end),
        negative,
        grouped,
        fractional,
        magnitude,
    })
}

/// Canonical rendering: plain digits, no trailing zeros.
pub fn render_plain(value: Decimal) -> String {
    value.normalize().to_string()
}

/// Digit-grouped rendering: "10,000,000", "1,234.5".
pub fn render_grouped(value: Decimal) -> String {
    let plain = render_plain(value);
    let (sign, rest) = match plain.strip_prefix('-') {
        Some(r) => ("-", r),
        None => ("", plain.as_str()),
    };
    let (int, frac) = match rest.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (rest, None),
    };
    let mut grouped = String::with_capacity(int.len() + int.len() / 3);
    for (k, c) in int.chars().enumerate() {
        if k > 0 && (int.len() - k) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    match frac {
        Some(f) => format!("{sign}{grouped}.{f}"),
        None => format!("{sign}{grouped}"),
    }
}

/// Number-plus-word rendering: "10 million", "1.5 billion". Values below a
/// thousand render plain.
pub fn render_magnitude(value: Decimal) -> String {
    const WORDS: [(i64, &str); 4] = [
        (1_000_000_000_000, "trillion"),
        (1_000_000_000, "billion"),
        (1_000_000, "million"),
        (1_000, "thousand"),
    ];
    for (m, word) in WORDS {
        let m = Decimal::from(m);
        if value.abs() >= m {
            return format!("{} {word}", render_plain(value / m));
        }
    }
    render_plain(value)
}
