//! Rule-based quantity extraction.
//!
//! Finds values, resolves their units against a [`UnitCatalog`], detects
//! condition phrases and attaches a short concept span to each quantity.
//! Deterministic and stateless apart from the catalog and dictionary.

mod concept;
mod unit;
mod value;

pub use concept::concept_for;
pub use unit::{attach_surface, resolve_unit, ResolvedUnit};
pub use value::{parse_value, render_grouped, render_magnitude, render_plain, ParsedValue};

use serde::{Deserialize, Serialize};

use crate::catalog::UnitCatalog;
use crate::conditions::ConditionDictionary;
use crate::text::{is_query_stopword, is_word_char, tokenize};
use crate::types::{Condition, Quantity, QuantityConstraint, QuantityQuery, Span};

/// Concept text attached to the quantity at `quantity` (an index into
/// [`Extraction::quantities`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMention {
    pub text: String,
    pub quantity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub quantities: Vec<Quantity>,
    pub concepts: Vec<ConceptMention>,
    pub conditions: Vec<(Condition, Span)>,
}

impl Extraction {
    pub fn concept_of(&self, quantity: usize) -> Option<&str> {
        self.concepts
            .iter()
            .find(|c| c.quantity == quantity)
            .map(|c| c.text.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Extractor {
    catalog: UnitCatalog,
    conditions: ConditionDictionary,
}

impl Extractor {
    pub fn new(catalog: UnitCatalog, conditions: ConditionDictionary) -> Self {
        Extractor {
            catalog,
            conditions,
        }
    }

    /// Starter catalog and default condition dictionary.
    pub fn starter() -> Self {
        Self::new(UnitCatalog::starter(), ConditionDictionary::default())
    }

    pub fn catalog(&self) -> &UnitCatalog {
        &self.catalog
    }

    pub fn conditions(&self) -> &ConditionDictionary {
        &self.conditions
    }

    /// All quantities in `text`, left to right, non-overlapping.
    pub fn quantities(&self, text: &str) -> Vec<Quantity> {
        let mut out = Vec::new();
        let mut floor = 0;
        let mut pos = 0;
        while pos < text.len() {
            let c = text[pos..].chars().next().expect("in bounds");
            if !(c.is_ascii_digit() || c == '-') {
                pos += c.len_utf8();
                continue;
            }
            let Some(parsed) = parse_value(text, pos) else {
                pos += c.len_utf8();
                continue;
            };
            let unit = resolve_unit(text, parsed.span, floor, &self.catalog);
            if unit.is_dimensionless() && !accept_bare_number(text, &parsed) {
                pos = skip_token(text, parsed.span.end);
                continue;
            }
            let span = match &unit.mention {
                Some(m) => parsed.span.cover(&m.span),
                None => parsed.span,
            };
            out.push(Quantity {
                value: parsed.value,
                unit: unit.canonical,
                span,
                value_span: parsed.span,
                unit_mention: unit.mention,
            });
            floor = span.end;
            pos = span.end;
        }
        out
    }

    /// Quantities, one concept per quantity where one is found, and every
    /// condition phrase in the sentence.
    pub fn extract_sentence(&self, text: &str) -> Extraction {
        let quantities = self.quantities(text);
        let concepts = (0..quantities.len())
            .filter_map(|i| {
                concept_for(text, &quantities, i).map(|text| ConceptMention { text, quantity: i })
            })
            .collect();
        let conditions = self
            .conditions
            .find_all(text)
            .into_iter()
            .map(|m| (m.condition, m.span))
            .collect();
        Extraction {
            quantities,
            concepts,
            conditions,
        }
    }

    /// Splits a free-text query into search terms, condition and quantity.
    ///
    /// The query quantity is the first one carrying a unit, else the first
    /// one. Its condition is the nearest phrase before it, defaulting to
    /// equality. Without any quantity the query is term-only.
    pub fn parse_query(&self, qid: &str, raw: &str) -> QuantityQuery {
        let tokens = tokenize(raw);
        let lexical_terms: Vec<String> = tokens
            .iter()
            .filter(|t| !is_query_stopword(&t.text))
            .map(|t| t.text.clone())
            .collect();
        let quantities = self.quantities(raw);
        let chosen = quantities
            .iter()
            .find(|q| !q.is_dimensionless())
            .or_else(|| quantities.first());
        let Some(quantity) = chosen else {
            return QuantityQuery::term_only(qid, raw, lexical_terms);
        };
        let matched = self.conditions.detect(raw, Some(quantity.span.start));
        let condition = matched.map_or(Condition::Equal, |m| m.condition);
        let excluded: Vec<Span> = std::iter::once(quantity.span)
            .chain(matched.map(|m| m.span))
            .collect();
        let terms = tokens
            .iter()
            .filter(|t| !excluded.iter().any(|e| e.overlaps(&t.span)))
            .filter(|t| !is_query_stopword(&t.text))
            .map(|t| t.text.clone())
            .collect();
        QuantityQuery {
            qid: qid.to_string(),
            raw_text: raw.to_string(),
            terms,
            lexical_terms,
            constraint: Some(QuantityConstraint {
                condition,
                quantity: quantity.clone(),
            }),
        }
    }
}

/// Unitless numbers are kept unless they look like part of a name
/// ("iPhone 11", "May 31"), a year, or an alphanumeric code ("3rd").
fn accept_bare_number(text: &str, parsed: &ParsedValue) -> bool {
    if text[parsed.span.end..]
        .chars()
        .next()
        .is_some_and(is_word_char)
    {
        return false;
    }
    if !parsed.is_plain_integer() {
        return true;
    }
    let digits = parsed.span.slice(text);
    if digits.len() == 4 {
        if let Ok(y) = digits.parse::<u32>() {
            if (1800..=2100).contains(&y) {
                return false;
            }
        }
    }
    !follows_name(text, parsed.span.start)
}

/// True when the word right before `pos` (one space away) has an uppercase
/// letter.
pub(crate) fn follows_name(text: &str, pos: usize) -> bool {
    let Some(before) = text[..pos].strip_suffix(' ') else {
        return false;
    };
    let word_start = before
        .char_indices()
        .rev()
        .find(|&(_, c)| !is_word_char(c))
        .map_or(0, |(i, c)| i + c.len_utf8());
    let word = &before[word_start..];
    !word.is_empty() && word.chars().any(char::is_uppercase)
}

fn skip_token(text: &str, mut pos: usize) -> usize {
    while let Some(c) = text[pos..].chars().next() {
        if !is_word_char(c) {
            break;
        }
        pos += c.len_utf8();
    }
    pos
}
