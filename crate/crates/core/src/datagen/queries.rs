//! Template query generation over the concept/unit index.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::concept_index::{ConceptUnitEntry, ConceptUnitIndex};
use super::expansion::ConceptExpander;
use super::samples::split_by_condition;
use super::{derived_rng, DatagenConfig, DatagenStats};
use crate::catalog::UnitCatalog;
use crate::conditions::ConditionDictionary;
use crate::corpus::Collection;
use crate::error::Result;
use crate::extractor::{attach_surface, render_grouped, render_magnitude, render_plain, Extractor};
use crate::types::{Condition, Decimal, Sentence, UnitPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryOrigin {
    /// Most frequent value for equality, value nearest the mean otherwise.
    PeakMean,
    Random,
    /// Generated for an expanded concept.
    Expanded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedQuery {
    pub qid: String,
    pub text: String,
    pub concept: String,
    /// The indexed concept the query was built from; differs from `concept`
    /// for expanded queries.
    pub source_concept: String,
    pub condition: Condition,
    pub value: Decimal,
    pub unit: String,
    pub unit_surface: String,
    pub condition_surface: String,
    pub origin: QueryOrigin,
}

/// Candidate query values in order of preference.
///
/// Equality prefers frequent values, ties toward the smaller one. Bounds
/// prefer values near the arithmetic mean, ties toward the smaller one, and
/// only keep values that leave at least one observed value on each side of
/// the bound.
pub fn value_preference(values: &[Decimal], condition: Condition) -> Vec<Decimal> {
    let mut counts: BTreeMap<Decimal, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v.normalize()).or_default() += 1;
    }
    match condition {
        Condition::Equal => {
            let mut by_freq: Vec<(Decimal, usize)> = counts.into_iter().collect();
            by_freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            by_freq.into_iter().map(|(v, _)| v).collect()
        }
        Condition::Greater | Condition::Less => {
            let Some(mean) = mean(values) else {
                return Vec::new();
            };
            let mut admissible: Vec<Decimal> = counts
                .into_keys()
                .filter(|&vx| {
                    let pos = values.iter().any(|&v| condition.holds(vx, v));
                    let neg = values.iter().any(|&v| !condition.holds(vx, v));
                    pos && neg
                })
                .collect();
            admissible.sort_by(|a, b| (*a - mean).abs().cmp(&(*b - mean).abs()).then(a.cmp(b)));
            admissible
        }
    }
}

fn mean(values: &[Decimal]) -> Option<Decimal> {
    if values.is_empty() {
        return None;
    }
    let mut sum = Decimal::ZERO;
    for v in values {
        sum = sum.checked_add(*v)?;
    }
    sum.checked_div(Decimal::from(values.len()))
}

/// The preferred query value, or `None` when no value supports both
/// positives and negatives under a bound.
pub fn select_query_value(values: &[Decimal], condition: Condition) -> Option<Decimal> {
    value_preference(values, condition).into_iter().next()
}

/// `{concept} {condition} {unit before}{value}{unit after}`
pub fn query_text(
    concept: &str,
    condition_surface: &str,
    value_text: &str,
    unit_surface: &str,
    position: UnitPosition,
) -> String {
    let quantity = attach_surface(value_text, unit_surface, position);
    format!("{concept} {condition_surface} {quantity}")
}

pub(crate) fn render_value(value: Decimal, config: &DatagenConfig, rng: &mut ChaCha8Rng) -> String {
    if value.abs() >= config.written_form_threshold && rng.gen_bool(config.written_form_probability)
    {
        if rng.gen_bool(0.5) {
            render_grouped(value)
        } else {
            render_magnitude(value)
        }
    } else {
        render_plain(value)
    }
}

struct Ingredients<'a> {
    catalog: &'a UnitCatalog,
    conditions: &'a ConditionDictionary,
    config: &'a DatagenConfig,
}

impl Ingredients<'_> {
    #[allow(clippy::too_many_arguments)]
    fn render(
        &self,
        concept: &str,
        source_concept: &str,
        unit: &str,
        condition: Condition,
        value: Decimal,
        origin: QueryOrigin,
        rng: &mut ChaCha8Rng,
    ) -> Option<GeneratedQuery> {
        let surfaces: Vec<(&str, UnitPosition)> = self.catalog.get(unit)?.surfaces().collect();
        let &(surface, position) = surfaces.choose(rng)?;
        let condition_surface = self.conditions.surfaces(condition).choose(rng)?.clone();
        let value_text = render_value(value, self.config, rng);
        Some(GeneratedQuery {
            qid: String::new(),
            text: query_text(concept, &condition_surface, &value_text, surface, position),
            concept: concept.to_string(),
            source_concept: source_concept.to_string(),
            condition,
            value,
            unit: unit.to_string(),
            unit_surface: surface.to_string(),
            condition_surface,
            origin,
        })
    }
}

fn admissible_values(
    entry: &ConceptUnitEntry,
    sentences: &[&Sentence],
    unit: &str,
    condition: Condition,
) -> Vec<Decimal> {
    value_preference(&entry.values, condition)
        .into_iter()
        .filter(|&v| {
            let (pos, neg) = split_by_condition(sentences.iter().copied(), condition, v, unit);
            !pos.is_empty() && (condition == Condition::Equal || !neg.is_empty())
        })
        .collect()
}

/// Per concept/unit pair and condition: one query at the preferred value,
/// one at a random admissible value, and one per concept expansion at a
/// random admissible value. Every query is re-parsed and dropped unless the
/// parse recovers its condition, value and unit.
pub fn generate_queries(
    index: &ConceptUnitIndex,
    collection: &Collection,
    extractor: &Extractor,
    expander: &dyn ConceptExpander,
    config: &DatagenConfig,
    stats: &mut DatagenStats,
) -> Result<Vec<GeneratedQuery>> {
    let ing = Ingredients {
        catalog: extractor.catalog(),
        conditions: extractor.conditions(),
        config,
    };
    let mut out = Vec::new();
    for (concept, unit, entry) in index.pairs() {
        if concept.is_empty() {
            stats.pairs_without_concept += 1;
            continue;
        }
        stats.pairs += 1;
        let mut rng = derived_rng(config.seed, &["queries", concept, unit]);
        let sentences: Vec<&Sentence> = entry
            .sentences
            .iter()
            .filter_map(|id| collection.get(id))
            .collect();
        let expansions = if config.strategies.concept_expansion {
            expander.expand(concept)?
        } else {
            Vec::new()
        };

        let mut pair_queries = Vec::new();
        for condition in Condition::ALL {
            let values = admissible_values(entry, &sentences, unit, condition);
            let Some(&preferred) = values.first() else {
                stats.skipped_queries += 1;
                continue;
            };
            pair_queries.extend(ing.render(
                concept,
                concept,
                unit,
                condition,
                preferred,
                QueryOrigin::PeakMean,
                &mut rng,
            ));
            if config.random_queries {
                let v = *values.choose(&mut rng).expect("non-empty");
                pair_queries.extend(ing.render(
                    concept,
                    concept,
                    unit,
                    condition,
                    v,
                    QueryOrigin::Random,
                    &mut rng,
                ));
            }
            for e in &expansions {
                let v = *values.choose(&mut rng).expect("non-empty");
                pair_queries.extend(ing.render(
                    e,
                    concept,
                    unit,
                    condition,
                    v,
                    QueryOrigin::Expanded,
                    &mut rng,
                ));
            }
        }

        for q in pair_queries {
            let parsed = extractor.parse_query("", &q.text);
            let ok = parsed.constraint.as_ref().is_some_and(|c| {
                c.condition == q.condition
                    && c.quantity.unit == q.unit
                    && c.quantity.value == q.value
            });
            if ok {
                out.push(q);
            } else {
                log::debug!("dropping query that does not re-parse: {}", q.text);
                stats.dropped_queries += 1;
            }
        }
    }
    for (i, q) in out.iter_mut().enumerate() {
        q.qid = format!("g{:06}", i + 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn dec(vals: &[&str]) -> Vec<Decimal> {
        vals.iter().map(|v| Decimal::from_str(v).unwrap()).collect()
    }

    #[test]
    fn preferred_values() {
        let vals = dec(&["0.9", "1.4", "17.0", "17.0", "22.0", "26.0", "35.0", "84.0"]);
        assert_eq!(
            select_query_value(&vals, Condition::Equal),
            Some(Decimal::from(17))
        );
        assert_eq!(
            select_query_value(&vals, Condition::Greater),
            Some(Decimal::from(26))
        );
        assert_eq!(
            select_query_value(&vals, Condition::Less),
            Some(Decimal::from(26))
        );
        assert_eq!(select_query_value(&dec(&["5"]), Condition::Less), None);
        assert_eq!(
            select_query_value(&dec(&["5"]), Condition::Equal),
            Some(Decimal::from(5))
        );
    }

    #[test]
    fn template() {
        assert_eq!(
            query_text(
                "cannabis company",
                "more than",
                "26",
                "cents per share",
                UnitPosition::Suffix
            ),
            "cannabis company more than 26 cents per share"
        );
        assert_eq!(
            query_text("Audi", "over", "40,000", "$", UnitPosition::Prefix),
            "Audi over $40,000"
        );
    }

    #[test]
    fn ties_go_to_smaller_value() {
        assert_eq!(
            select_query_value(&dec(&["3", "1", "3", "1"]), Condition::Equal),
            Some(Decimal::from(1))
        );
        // mean 15: 10 and 20 equally near
        assert_eq!(
            select_query_value(&dec(&["10", "20"]), Condition::Greater),
            Some(Decimal::from(10))
        );
        // 10 is nearest but nothing lies below it
        assert_eq!(
            select_query_value(&dec(&["10", "20"]), Condition::Less),
            Some(Decimal::from(20))
        );
    }
}
