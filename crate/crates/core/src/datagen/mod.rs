//! Synthetic training data for quantity-aware rankers.
//!
//! Pipeline: build the concept/unit index over an extracted collection,
//! generate template queries per concept/unit pair and condition, then for
//! each query collect positive and negative sentences (original sampling,
//! unit permutation, value permutation), verify every sample by
//! re-extraction, and pair them into training triples.
//!
//! All randomness comes from ChaCha8 streams derived from the seed and the
//! concept/unit pair or query, so output does not depend on processing
//! order.

mod concept_index;
mod expansion;
mod queries;
mod samples;

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use concept_index::{ConceptUnitEntry, ConceptUnitIndex};
pub use expansion::{
    clean_expansions, CompletionClient, ConceptExpander, PromptExpander, RecordedCompletions,
    StaticExpansions, FINANCE_PROMPT, MEDICAL_PROMPT, PLACEHOLDER,
};
pub use queries::{
    generate_queries, query_text, select_query_value, value_preference, GeneratedQuery, QueryOrigin,
};
pub use samples::{
    aggregate_samples, permute_units, permute_values, sample_original, satisfies,
    split_by_condition, PairingReport, Provenance, TrainingTriple,
};

use crate::corpus::Collection;
use crate::error::{Error, Result};
use crate::extractor::Extractor;
use crate::types::{Decimal, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Strategies {
    pub original: bool,
    pub unit_permutation: bool,
    pub value_permutation: bool,
    pub concept_expansion: bool,
}

impl Default for Strategies {
    fn default() -> Self {
        Strategies {
            original: true,
            unit_permutation: true,
            value_permutation: false,
            concept_expansion: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatagenConfig {
    pub seed: u64,
    /// Samples drawn per side and strategy.
    pub sample_size: usize,
    pub strategies: Strategies,
    /// Also generate one query per pair and condition at a random value.
    pub random_queries: bool,
    /// Values at or above the threshold are written grouped ("10,000,000")
    /// or with a magnitude word ("10 million") with this probability.
    pub written_form_probability: f64,
    pub written_form_threshold: Decimal,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        DatagenConfig {
            seed: 0,
            sample_size: 2,
            strategies: Strategies::default(),
            random_queries: true,
            written_form_probability: 0.5,
            written_form_threshold: Decimal::from(1_000_000),
        }
    }
}

impl DatagenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.written_form_probability) {
            return Err(Error::Invalid(format!(
                "written_form_probability must lie in [0, 1], got {}",
                self.written_form_probability
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatagenStats {
    /// Concept/unit pairs used for generation.
    pub pairs: usize,
    /// Pairs whose quantities had no concept.
    pub pairs_without_concept: usize,
    /// Pair and condition combinations without an admissible value.
    pub skipped_queries: usize,
    /// Generated queries whose text did not parse back to their constraint.
    pub dropped_queries: usize,
    /// Samples rejected by re-extraction.
    pub dropped_samples: usize,
    pub pairing: PairingReport,
}

#[derive(Debug, Clone, Default)]
pub struct DatagenOutput {
    pub queries: Vec<GeneratedQuery>,
    pub triples: Vec<TrainingTriple>,
    pub stats: DatagenStats,
}

pub(crate) fn derived_rng(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn verified(
    texts: Vec<String>,
    provenance: Provenance,
    positive: bool,
    query: &GeneratedQuery,
    extractor: &Extractor,
    stats: &mut DatagenStats,
) -> Vec<(Provenance, String)> {
    texts
        .into_iter()
        .filter(|t| {
            let ok = satisfies(
                &extractor.quantities(t),
                query.condition,
                query.value,
                &query.unit,
            ) == positive;
            if !ok {
                log::debug!("dropping {provenance:?} sample for {}: {t}", query.qid);
                stats.dropped_samples += 1;
            }
            ok
        })
        .map(|t| (provenance, t))
        .collect()
}

/// Samples and triples for one query.
pub fn generate_samples(
    query: &GeneratedQuery,
    index: &ConceptUnitIndex,
    collection: &Collection,
    extractor: &Extractor,
    config: &DatagenConfig,
    stats: &mut DatagenStats,
) -> Vec<TrainingTriple> {
    let Some(entry) = index.get(&query.source_concept, &query.unit) else {
        return Vec::new();
    };
    let value = query.value.to_string();
    let mut rng = derived_rng(
        config.seed,
        &[
            "samples",
            &query.source_concept,
            &query.unit,
            query.condition.as_str(),
            &value,
            &query.text,
        ],
    );
    let sentences: Vec<&Sentence> = entry
        .sentences
        .iter()
        .filter_map(|id| collection.get(id))
        .collect();
    let (s_plus, s_minus) =
        split_by_condition(sentences, query.condition, query.value, &query.unit);
    let n = config.sample_size;
    let strategies = config.strategies;

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut add = |p: Vec<String>, q: Vec<String>, prov: Provenance, stats: &mut DatagenStats| {
        pos.extend(verified(p, prov, true, query, extractor, stats));
        neg.extend(verified(q, prov, false, query, extractor, stats));
    };
    if strategies.original {
        let (p, q) = sample_original(&s_plus, &s_minus, n, &mut rng);
        add(
            p.into_iter().map(|s| s.text.clone()).collect(),
            q.into_iter().map(|s| s.text.clone()).collect(),
            Provenance::Original,
            stats,
        );
    }
    if strategies.unit_permutation {
        let (p, q) = permute_units(&s_plus, &query.unit, extractor.catalog(), n, &mut rng);
        add(p, q, Provenance::UnitPerm, stats);
    }
    if strategies.value_permutation {
        let (p, q) = permute_values(
            &s_plus,
            &s_minus,
            &entry.values,
            query.condition,
            query.value,
            &query.unit,
            n,
            &mut rng,
        );
        add(p, q, Provenance::ValuePerm, stats);
    }
    aggregate_samples(&query.qid, &query.text, &pos, &neg, &mut stats.pairing)
}

/// The whole pipeline over an extracted collection.
pub fn generate(
    collection: &Collection,
    extractor: &Extractor,
    expander: &dyn ConceptExpander,
    config: &DatagenConfig,
) -> Result<DatagenOutput> {
    config.validate()?;
    let index = ConceptUnitIndex::build(collection.sentences(), extractor);
    let mut stats = DatagenStats::default();
    let queries = generate_queries(&index, collection, extractor, expander, config, &mut stats)?;
    let mut triples = Vec::new();
    for q in &queries {
        triples.extend(generate_samples(
            q, &index, collection, extractor, config, &mut stats,
        ));
    }
    Ok(DatagenOutput {
        queries,
        triples,
        stats,
    })
}

#[derive(Serialize)]
struct QueryRecord<'a> {
    qid: &'a str,
    text: &'a str,
    concept: &'a str,
    condition: crate::types::Condition,
    value: Decimal,
    unit: &'a str,
    origin: QueryOrigin,
    source_concept: &'a str,
}

pub fn write_queries(w: &mut impl Write, queries: &[GeneratedQuery]) -> std::io::Result<()> {
    for q in queries {
        let record = QueryRecord {
            qid: &q.qid,
            text: &q.text,
            concept: &q.concept,
            condition: q.condition,
            value: q.value,
            unit: &q.unit,
            origin: q.origin,
            source_concept: &q.source_concept,
        };
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_triples(w: &mut impl Write, triples: &[TrainingTriple]) -> std::io::Result<()> {
    for t in triples {
        serde_json::to_writer(&mut *w, t)?;
        writeln!(w)?;
    }
    Ok(())
}
