//! Unit surface resolution around a parsed value.

use crate::catalog::{Surface, UnitCatalog};
use crate::text::is_word_char;
use crate::types::{Span, UnitMention, UnitPosition, DIMENSIONLESS};

/// A resolved unit: canonical name plus where its surface was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedUnit {
    pub canonical: String,
    pub mention: Option<UnitMention>,
}

impl ResolvedUnit {
    pub fn dimensionless() -> Self {
        ResolvedUnit {
            canonical: DIMENSIONLESS.to_string(),
            mention: None,
        }
    }

    pub fn is_dimensionless(&self) -> bool {
        self.mention.is_none()
    }
}

fn eq_ascii_ci(a: &[u8], b: &[u8]) -> bool {
    a.eq_ignore_ascii_case(b)
}

fn prefix_match<'c>(
    text: &str,
    value_start: usize,
    floor: usize,
    surfaces: &'c [Surface],
) -> Option<(&'c Surface, Span)> {
    let before = &text[floor..value_start];
    let trimmed = before.trim_end();
    let end = floor + trimmed.len();
    let bytes = text.as_bytes();
    surfaces.iter().find_map(|s| {
        let len = s.text.len();
        if end < floor + len {
            return None;
        }
        let start = end - len;
        if !text.is_char_boundary(start) || !eq_ascii_ci(&bytes[start..end], s.text.as_bytes()) {
            return None;
        }
        let first = s.text.chars().next()?;
        if is_word_char(first) && text[..start].chars().next_back().is_some_and(is_word_char) {
            return None;
        }
        Some((s, Span::new(start, end)))
    })
}

fn suffix_match<'c>(
    text: &str,
    value_end: usize,
    surfaces: &'c [Surface],
) -> Option<(&'c Surface, Span)> {
    let after = &text[value_end..];
    let start = value_end + (after.len() - after.trim_start().len());
    let bytes = text.as_bytes();
    surfaces.iter().find_map(|s| {
        let end = start + s.text.len();
        if end > text.len()
            || !text.is_char_boundary(end)
            || !eq_ascii_ci(&bytes[start..end], s.text.as_bytes())
        {
            return None;
        }
        let last = s.text.chars().next_back()?;
        if is_word_char(last) && text[end..].chars().next().is_some_and(is_word_char) {
            return None;
        }
        Some((s, Span::new(start, end)))
    })
}

/// Longest prefix surface ending right before the value and longest suffix
/// surface starting right after it, whitespace-tolerant. When both sides
/// match, the longer surface wins; on a tie the prefix wins. Prefix
/// surfaces never reach left of `floor`.
pub fn resolve_unit(
    text: &str,
    value_span: Span,
    floor: usize,
    catalog: &UnitCatalog,
) -> ResolvedUnit {
    let prefix = prefix_match(text, value_span.start, floor, catalog.prefix_surfaces());
    let suffix = suffix_match(text, value_span.end, catalog.suffix_surfaces());
    let chosen = match (prefix, suffix) {
        (Some(p), Some(s)) => {
            if s.0.text.chars().count() > p.0.text.chars().count() {
                Some(s)
            } else {
                Some(p)
            }
        }
        (p, s) => p.or(s),
    };
    match chosen {
        Some((surface, span)) => ResolvedUnit {
            canonical: catalog.unit_at(surface.unit).canonical_name.clone(),
            mention: Some(UnitMention {
                span,
                position: surface.position,
            }),
        },
        None => ResolvedUnit::dimensionless(),
    }
}

/// Renders `value_text` with `surface` on the given side, the way the
/// surface is conventionally written: symbols glued, words spaced.
pub fn attach_surface(value_text: &str, surface: &str, position: UnitPosition) -> String {
    match position {
        UnitPosition::Prefix => {
            if surface.chars().next_back().is_some_and(char::is_alphabetic) {
                format!("{surface} {value_text}")
            } else {
                format!("{surface}{value_text}")
            }
        }
        UnitPosition::Suffix => {
            if surface.chars().next().is_some_and(char::is_alphabetic) {
                format!("{value_text} {surface}")
            } else {
                format!("{value_text}{surface}")
            }
        }
    }
}
