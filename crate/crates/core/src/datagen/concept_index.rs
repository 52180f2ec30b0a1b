//! Concept/unit index: which values a concept takes in a unit, and where.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::extractor::Extractor;
use crate::types::{Decimal, Sentence};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptUnitEntry {
    /// One entry per occurrence, so repeated values keep their frequency.
    pub values: Vec<Decimal>,
    /// Sentence ids in first-seen order, each listed once.
    pub sentences: Vec<String>,
}

/// `(concept, canonical unit) -> entry`. Quantities without a concept are
/// filed under the empty concept; dimensionless quantities are left out.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptUnitIndex {
    entries: BTreeMap<String, BTreeMap<String, ConceptUnitEntry>>,
}

impl ConceptUnitIndex {
    pub fn build<'a>(
        sentences: impl IntoIterator<Item = &'a Sentence>,
        extractor: &Extractor,
    ) -> Self {
        let mut index = ConceptUnitIndex::default();
        for s in sentences {
            let ex = extractor.extract_sentence(&s.text);
            for (i, q) in ex.quantities.iter().enumerate() {
                if q.is_dimensionless() {
                    continue;
                }
                let concept = ex.concept_of(i).unwrap_or("").to_string();
                let entry = index
                    .entries
                    .entry(concept)
                    .or_default()
                    .entry(q.unit.clone())
                    .or_default();
                entry.values.push(q.value);
                if entry.sentences.last() != Some(&s.sent_id) {
                    entry.sentences.push(s.sent_id.clone());
                }
            }
        }
        index
    }

    pub fn get(&self, concept: &str, unit: &str) -> Option<&ConceptUnitEntry> {
        self.entries.get(concept)?.get(unit)
    }

    /// All pairs in concept then unit order, including the empty concept.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, &ConceptUnitEntry)> {
        self.entries
            .iter()
            .flat_map(|(c, units)| units.iter().map(move |(u, e)| (c.as_str(), u.as_str(), e)))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.entries
            .keys()
            .map(String::as_str)
            .filter(|c| !c.is_empty())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
