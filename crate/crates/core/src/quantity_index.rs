//! Per-unit sorted value index and the sentence quantity score.
//!
//! For each canonical unit the index keeps a value-ordered map of postings,
//! so the sentences holding a value strictly above or below a bound are a
//! single range scan. Every posting also knows how many quantities its
//! sentence holds, which is the normaliser of the quantity score:
//!
//! ```text
//! qs(x, s) = 1/|Q_s| * sum over q in Q_s of [unit(q) == unit(x)] * phi_cond(v_x, v_q)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use crate::catalog::UnitCatalog;
use crate::corpus::Collection;
use crate::phi::PhiSet;
use crate::types::{Condition, Decimal, Quantity};

/// A sentence holding a value, by position in the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub sentence: u32,
    pub quantity_count: u32,
}

/// Quantity score over one sentence's `(unit, value)` list.
///
/// With `convert` set, a quantity in another unit of the query unit's
/// family is converted through the catalog factors before scoring.
pub fn quantity_score<'a, I>(
    quantities: I,
    condition: Condition,
    query: &Quantity,
    phi: &PhiSet,
    convert: Option<&UnitCatalog>,
) -> f64
where
    I: IntoIterator<Item = (&'a str, Decimal)>,
{
    let mut n = 0usize;
    let mut sum = 0.0;
    for (unit, value) in quantities {
        n += 1;
        let value = if unit == query.unit {
            Some(value)
        } else {
            convert.and_then(|c| convert_value(c, unit, &query.unit, value))
        };
        if let Some(v) = value {
            sum += phi.score(condition, query.value, v);
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn convert_value(catalog: &UnitCatalog, from: &str, to: &str, value: Decimal) -> Option<Decimal> {
    let a = catalog.get(from)?;
    let b = catalog.get(to)?;
    if a.family != b.family {
        return None;
    }
    let ratio = Decimal::from_f64_retain(a.conversion_factor? / b.conversion_factor?)?;
    value.checked_mul(ratio)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuantityIndex {
    sent_ids: Vec<String>,
    sentence_quantities: Vec<Vec<(String, Decimal)>>,
    postings: BTreeMap<String, BTreeMap<Decimal, Vec<Posting>>>,
}

impl QuantityIndex {
    pub fn build(collection: &Collection) -> Self {
        let mut order: Vec<usize> = (0..collection.len()).collect();
        let sentences = collection.sentences();
        order.sort_by(|&a, &b| sentences[a].sent_id.cmp(&sentences[b].sent_id));

        let mut index = QuantityIndex::default();
        for (pos, &i) in order.iter().enumerate() {
            let s = &sentences[i];
            let posting = Posting {
                sentence: pos as u32,
                quantity_count: s.quantities.len() as u32,
            };
            let mut seen = BTreeSet::new();
            for q in &s.quantities {
                if !seen.insert((q.unit.as_str(), q.value)) {
                    continue;
                }
                index
                    .postings
                    .entry(q.unit.clone())
                    .or_default()
                    .entry(q.value)
                    .or_default()
                    .push(posting);
            }
            index.sent_ids.push(s.sent_id.clone());
            index.sentence_quantities.push(
                s.quantities
                    .iter()
                    .map(|q| (q.unit.clone(), q.value))
                    .collect(),
            );
        }
        index
    }

    pub fn len(&self) -> usize {
        self.sent_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sent_ids.is_empty()
    }

    pub fn units(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn sent_id(&self, sentence: u32) -> &str {
        &self.sent_ids[sentence as usize]
    }

    pub fn position(&self, sent_id: &str) -> Option<u32> {
        self.sent_ids
            .binary_search_by(|s| s.as_str().cmp(sent_id))
            .ok()
            .map(|p| p as u32)
    }

    /// Postings whose value satisfies `value <cond> query.value` in the
    /// query unit: strictly above for greater, strictly below for less,
    /// exactly equal for equal. Ordered by value, then sentence id.
    pub fn candidates_for(
        &self,
        condition: Condition,
        query: &Quantity,
    ) -> Vec<(Decimal, Posting)> {
        let Some(values) = self.postings.get(&query.unit) else {
            return Vec::new();
        };
        let range = match condition {
            Condition::Greater => values.range((Bound::Excluded(query.value), Bound::Unbounded)),
            Condition::Less => values.range((Bound::Unbounded, Bound::Excluded(query.value))),
            Condition::Equal => {
                values.range((Bound::Included(query.value), Bound::Included(query.value)))
            }
        };
        range
            .flat_map(|(v, ps)| ps.iter().map(move |p| (*v, *p)))
            .collect()
    }

    pub fn quantity_score(
        &self,
        sentence: u32,
        condition: Condition,
        query: &Quantity,
        phi: &PhiSet,
        convert: Option<&UnitCatalog>,
    ) -> f64 {
        let qs = &self.sentence_quantities[sentence as usize];
        quantity_score(
            qs.iter().map(|(u, v)| (u.as_str(), *v)),
            condition,
            query,
            phi,
            convert,
        )
    }

    /// Every sentence with a non-zero quantity score, by index position,
    /// matching units exactly.
    ///
    /// Bounded conditions touch only the range-scan candidates; equality
    /// decays smoothly, so it visits every posting of the query unit.
    pub fn score_all(
        &self,
        condition: Condition,
        query: &Quantity,
        phi: &PhiSet,
    ) -> Vec<(u32, f64)> {
        let sentences: BTreeSet<u32> = match condition {
            Condition::Equal => self
                .postings
                .get(&query.unit)
                .into_iter()
                .flat_map(|m| m.values().flatten().map(|p| p.sentence))
                .collect(),
            _ => self
                .candidates_for(condition, query)
                .into_iter()
                .map(|(_, p)| p.sentence)
                .collect(),
        };
        sentences
            .into_iter()
            .map(|s| (s, self.quantity_score(s, condition, query, phi, None)))
            .filter(|(_, score)| *score > 0.0)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Sentence;
    use std::str::FromStr;

    fn d(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    fn sentence(id: &str, qs: &[(&str, &str)]) -> Sentence {
        Sentence {
            sent_id: id.into(),
            doc_id: id.into(),
            text: String::new(),
            quantities: qs.iter().map(|(v, u)| Quantity::bare(d(v), *u)).collect(),
        }
    }

    fn cents_index() -> QuantityIndex {
        let values = ["0.9", "1.4", "17", "17", "22", "26", "35", "84"];
        let sentences = values
            .iter()
            .enumerate()
            .map(|(i, v)| sentence(&format!("s{i}"), &[(v, "cent")]))
            .collect();
        QuantityIndex::build(&Collection::new(sentences).unwrap())
    }

    #[test]
    fn greater_range_scan() {
        let idx = cents_index();
        let got: Vec<Decimal> = idx
            .candidates_for(Condition::Greater, &Quantity::bare(d("26"), "cent"))
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        assert_eq!(got, [d("35"), d("84")]);
    }

    #[test]
    fn less_and_equal_scans() {
        let idx = cents_index();
        let less = idx.candidates_for(Condition::Less, &Quantity::bare(d("17"), "cent"));
        assert_eq!(less.len(), 2);
        let eq = idx.candidates_for(Condition::Equal, &Quantity::bare(d("17"), "cent"));
        assert_eq!(eq.len(), 2);
        assert!(idx
            .candidates_for(Condition::Equal, &Quantity::bare(d("17"), "euro"))
            .is_empty());
    }

    #[test]
    fn score_counts_every_quantity() {
        let s = sentence(
            "a",
            &[("236.5", "euro"), ("132", "euro"), ("3", "dimensionless")],
        );
        let q = Quantity::bare(d("200"), "euro");
        let got = quantity_score(
            s.quantities.iter().map(|q| (q.unit.as_str(), q.value)),
            Condition::Less,
            &q,
            &PhiSet::default(),
            None,
        );
        assert!((got - 0.66 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_euro_quantities() {
        let s = sentence("a", &[("236.5", "euro"), ("132", "euro")]);
        let idx = QuantityIndex::build(&Collection::new(vec![s]).unwrap());
        let got = idx.quantity_score(
            0,
            Condition::Less,
            &Quantity::bare(d("200"), "euro"),
            &PhiSet::default(),
            None,
        );
        assert!((got - 0.33).abs() < 1e-12);
    }

    #[test]
    fn conversion_is_opt_in() {
        let catalog = UnitCatalog::starter();
        let q = Quantity::bare(d("1"), "kilometre");
        let qs = [("metre", d("1500"))];
        let plain = quantity_score(qs, Condition::Greater, &q, &PhiSet::default(), None);
        assert_eq!(plain, 0.0);
        let converted = quantity_score(
            qs,
            Condition::Greater,
            &q,
            &PhiSet::default(),
            Some(&catalog),
        );
        assert!((converted - 1.0 / 1.5).abs() < 1e-9);
    }

    #[test]
    fn positions_follow_sent_id_order() {
        let c = Collection::new(vec![sentence("b", &[]), sentence("a", &[])]).unwrap();
        let idx = QuantityIndex::build(&c);
        assert_eq!(idx.sent_id(0), "a");
        assert_eq!(idx.position("b"), Some(1));
    }
}
