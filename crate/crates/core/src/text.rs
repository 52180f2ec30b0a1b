//! Tokenization shared by the indexes, the extractor and the query parser.
//!
//! Tokens are maximal runs of Unicode alphanumerics, lowercased, plus
//! single-character symbol tokens for currency signs and `%`. No stemming.

use crate::types::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

pub fn is_symbol_token(c: char) -> bool {
    matches!(c, '$' | '€' | '£' | '¥' | '₹' | '₩' | '₽' | '¢' | '%')
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            out.push(token(text, s, i));
        }
        if is_symbol_token(c) {
            out.push(token(text, i, i + c.len_utf8()));
        }
    }
    if let Some(s) = start {
        out.push(token(text, s, text.len()));
    }
    out
}

fn token(text: &str, start: usize, end: usize) -> Token {
    Token {
        text: text[start..end].to_lowercase(),
        span: Span::new(start, end),
    }
}

/// Lowercased token strings only.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Function words dropped from query terms.
const QUERY_STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "but", "by", "did", "do", "does", "for",
    "from", "had", "has", "have", "how", "i", "if", "in", "into", "is", "it", "its", "me", "my",
    "of", "on", "or", "our", "so", "than", "that", "the", "their", "them", "there", "these",
    "they", "this", "those", "to", "was", "we", "were", "what", "when", "where", "which", "who",
    "whom", "why", "will", "with", "would", "you", "your",
];

/// Extra words that never start or extend a concept span: auxiliaries and
/// the reporting or pricing verbs that typically sit between a concept and
/// its quantity.
const CONCEPT_SKIP: &[&str] = &[
    "about",
    "after",
    "against",
    "all",
    "also",
    "amounted",
    "among",
    "approximately",
    "around",
    "before",
    "between",
    "can",
    "charge",
    "charged",
    "charges",
    "could",
    "cost",
    "costing",
    "costs",
    "each",
    "earlier",
    "estimated",
    "every",
    "fell",
    "grew",
    "had",
    "just",
    "last",
    "many",
    "may",
    "might",
    "more",
    "most",
    "much",
    "nearly",
    "new",
    "now",
    "only",
    "over",
    "per",
    "priced",
    "reached",
    "reportedly",
    "roughly",
    "rose",
    "said",
    "says",
    "sells",
    "should",
    "since",
    "sold",
    "some",
    "stood",
    "such",
    "than",
    "then",
    "through",
    "totaled",
    "totalled",
    "under",
    "up",
    "weighs",
    "while",
    "whereas",
    "year",
    "ago",
    "about",
    "around",
    "still",
    "retails",
    "runs",
    "measures",
    "offers",
    "comes",
    "lists",
    "listed",
    "trades",
    "traded",
    "hit",
    "hits",
    "dropped",
    "climbed",
    "gained",
    "lost",
    "ended",
    "ending",
    "quarter",
    "including",
    "included",
    "includes",
    "like",
    "what",
    "whose",
    "not",
    "no",
    "very",
    "less",
    "below",
    "above",
    "exactly",
    "almost",
    "earned",
    "earns",
    "paid",
    "pays",
    "posted",
    "reported",
    "raised",
    "spent",
    "made",
    "makes",
    "generated",
    "recorded",
    "lists",
    "sold",
    "bought",
    "has",
    "have",
    "got",
    "gets",
    "saw",
];

pub fn is_query_stopword(word: &str) -> bool {
    QUERY_STOPWORDS.binary_search(&word).is_ok()
}

pub fn is_concept_skip(word: &str) -> bool {
    is_query_stopword(word) || CONCEPT_SKIP.contains(&word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopword_list_is_sorted() {
        let mut sorted = QUERY_STOPWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, QUERY_STOPWORDS);
    }

    #[test]
    fn keeps_currency_symbols() {
        let t = terms("The iPhone XR reached €236.50, up 5%.");
        assert_eq!(
            t,
            ["the", "iphone", "xr", "reached", "€", "236", "50", "up", "5", "%"]
        );
    }

    #[test]
    fn spans_point_into_source() {
        let text = "Größe: 12 km/h";
        for t in tokenize(text) {
            assert_eq!(t.span.slice(text).to_lowercase(), t.text);
        }
    }
}
