//! Concept span heuristic.

use super::follows_name;
use crate::text::{is_concept_skip, tokenize, Token};
use crate::types::Quantity;

const MAX_CONCEPT_TOKENS: usize = 4;

/// Characters allowed between two tokens of one concept ("S&P", "Coca-Cola").
fn joins(gap: &str) -> bool {
    gap.chars()
        .all(|c| c.is_whitespace() || matches!(c, '-' | '&' | '\'' | '’' | '/'))
}

fn is_numeric(t: &Token) -> bool {
    t.text.chars().all(|c| c.is_ascii_digit())
}

/// The concept of `quantities[index]`: the nearest run of content tokens to
/// its left, at most four tokens, never crossing the previous quantity.
/// Function words and bare numbers between the run and the quantity are
/// skipped; a number glued to a name ("iPhone 11") counts as content.
pub fn concept_for(text: &str, quantities: &[Quantity], index: usize) -> Option<String> {
    let q = &quantities[index];
    let floor = if index == 0 {
        0
    } else {
        quantities[index - 1].span.end
    };
    let region_end = q.span.start;
    let tokens: Vec<Token> = tokenize(&text[floor..region_end])
        .into_iter()
        .filter(|t| t.text.chars().any(char::is_alphanumeric))
        .map(|mut t| {
            t.span.start += floor;
            t.span.end += floor;
            t
        })
        .collect();

    let is_content = |t: &Token| {
        !is_concept_skip(&t.text) && (!is_numeric(t) || follows_name(text, t.span.start))
    };

    let mut i = tokens.len();
    while i > 0 && !is_content(&tokens[i - 1]) {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let last = i - 1;
    let mut first = last;
    while first > 0
        && last - first + 1 < MAX_CONCEPT_TOKENS
        && is_content(&tokens[first - 1])
        && joins(&text[tokens[first - 1].span.end..tokens[first].span.start])
    {
        first -= 1;
    }
    let start = tokens[first].span.start;
    let mut end = tokens[last].span.end;
    // trailing "+" belongs to names like "Disney+"
    while text[end..].starts_with('+') {
        end += 1;
    }
    Some(text[start..end].to_string())
}
