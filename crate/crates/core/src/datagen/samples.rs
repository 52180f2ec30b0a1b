//! Positive and negative sample generation: original sampling, unit
//! permutation and value permutation, plus pairing into triples.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::UnitCatalog;
use crate::extractor::{attach_surface, render_plain};
use crate::types::{Condition, Decimal, Quantity, Sentence, Span, UnitPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    UnitPerm,
    ValuePerm,
}

impl Provenance {
    pub const ALL: [Provenance; 3] = [
        Provenance::Original,
        Provenance::UnitPerm,
        Provenance::ValuePerm,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTriple {
    pub qid: String,
    pub query: String,
    pub pos: String,
    pub neg: String,
    pub provenance: Provenance,
}

/// True when some quantity in `unit` satisfies `value <condition> bound`.
pub fn satisfies(
    quantities: &[Quantity],
    condition: Condition,
    bound: Decimal,
    unit: &str,
) -> bool {
    quantities
        .iter()
        .any(|q| q.unit == unit && condition.holds(bound, q.value))
}

/// Positives hold at least one quantity in the query unit satisfying the
/// condition; everything else is negative. Input order is kept.
pub fn split_by_condition<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    condition: Condition,
    bound: Decimal,
    unit: &str,
) -> (Vec<&'a Sentence>, Vec<&'a Sentence>) {
    sentences
        .into_iter()
        .partition(|s| satisfies(&s.quantities, condition, bound, unit))
}

fn sample<T: Clone>(items: &[T], n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    items
        .choose_multiple(rng, n.min(items.len()))
        .cloned()
        .collect()
}

/// `n` draws without replacement from each side, reduced to the size of the
/// smaller side when either has fewer than `n`.
pub fn sample_original<T: Clone>(
    positives: &[T],
    negatives: &[T],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<T>, Vec<T>) {
    let n = n.min(positives.len()).min(negatives.len());
    let p = sample(positives, n, rng);
    let q = sample(negatives, n, rng);
    (p, q)
}

/// Applies non-overlapping replacements.
fn rewrite(text: &str, mut edits: Vec<(Span, String)>) -> String {
    edits.sort_by_key(|(s, _)| std::cmp::Reverse(s.start));
    let mut out = text.to_string();
    for (span, new) in edits {
        out.replace_range(span.start..span.end, &new);
    }
    out
}

fn with_surface(text: &str, q: &Quantity, surface: &str, position: UnitPosition) -> (Span, String) {
    (
        q.span,
        attach_surface(q.value_span.slice(text), surface, position),
    )
}

/// Positives: each query-unit surface swapped for another surface of the
/// same unit. Negatives: every query-unit quantity moved to another unit of
/// the same family. Each side is sampled down to `n` independently and is
/// empty when the catalog offers no alternative.
pub fn permute_units(
    positives: &[&Sentence],
    unit: &str,
    catalog: &UnitCatalog,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<String>, Vec<String>) {
    let Some(u) = catalog.get(unit) else {
        return (Vec::new(), Vec::new());
    };
    let own: Vec<_> = u.surfaces().collect();
    let others: Vec<_> = catalog
        .family_members(unit)
        .into_iter()
        .filter(|m| m.canonical_name != unit && m.surfaces().next().is_some())
        .collect();

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for s in positives {
        let targets: Vec<&Quantity> = s
            .quantities
            .iter()
            .filter(|q| q.unit == unit && q.unit_mention.is_some())
            .collect();
        if targets.is_empty() {
            continue;
        }

        let mut edits = Vec::new();
        for q in &targets {
            let current = q
                .unit_mention
                .as_ref()
                .expect("filtered")
                .span
                .slice(&s.text)
                .to_lowercase();
            let choices: Vec<_> = own
                .iter()
                .filter(|(t, _)| t.to_lowercase() != current)
                .collect();
            if let Some(&&(surface, position)) = choices.choose(rng) {
                edits.push(with_surface(&s.text, q, surface, position));
            }
        }
        if edits.len() == targets.len() {
            pos.push(rewrite(&s.text, edits));
        }

        if let Some(other) = others.choose(rng) {
            let surfaces: Vec<_> = other.surfaces().collect();
            let edits = targets
                .iter()
                .map(|q| {
                    let &(surface, position) = surfaces.choose(rng).expect("has surfaces");
                    with_surface(&s.text, q, surface, position)
                })
                .collect();
            neg.push(rewrite(&s.text, edits));
        }
    }
    (sample(&pos, n, rng), sample(&neg, n, rng))
}

/// Positives: one query-unit value of a negative sentence replaced by an
/// observed value satisfying the condition. Negatives: every satisfying
/// query-unit value of a positive sentence replaced by an observed value
/// violating it. Replacement values are drawn from `values`, so frequent
/// values are drawn more often.
#[allow(clippy::too_many_arguments)]
pub fn permute_values(
    positives: &[&Sentence],
    negatives: &[&Sentence],
    values: &[Decimal],
    condition: Condition,
    bound: Decimal,
    unit: &str,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<String>, Vec<String>) {
    let good: Vec<Decimal> = values
        .iter()
        .copied()
        .filter(|&v| condition.holds(bound, v))
        .collect();
    let bad: Vec<Decimal> = values
        .iter()
        .copied()
        .filter(|&v| !condition.holds(bound, v))
        .collect();

    let mut pos = Vec::new();
    if !good.is_empty() {
        for s in negatives {
            let Some(q) = s.quantities.iter().find(|q| q.unit == unit) else {
                continue;
            };
            let v = *good.choose(rng).expect("non-empty");
            pos.push(rewrite(&s.text, vec![(q.value_span, render_plain(v))]));
        }
    }
    let mut neg = Vec::new();
    if !bad.is_empty() {
        for s in positives {
            let edits: Vec<(Span, String)> = s
                .quantities
                .iter()
                .filter(|q| q.unit == unit && condition.holds(bound, q.value))
                .map(|q| {
                    (
                        q.value_span,
                        render_plain(*bad.choose(rng).expect("non-empty")),
                    )
                })
                .collect();
            if !edits.is_empty() {
                neg.push(rewrite(&s.text, edits));
            }
        }
    }
    (sample(&pos, n, rng), sample(&neg, n, rng))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PairingReport {
    pub triples: BTreeMap<Provenance, usize>,
    pub unpaired_positives: usize,
}

/// Pairs every positive with a negative: the i-th positive of a provenance
/// takes the i-th negative of the same provenance (cycling). When that
/// provenance has no negatives, negatives of the other provenances are used
/// round-robin. Positives are dropped only when there are no negatives.
pub fn aggregate_samples(
    qid: &str,
    query: &str,
    positives: &[(Provenance, String)],
    negatives: &[(Provenance, String)],
    report: &mut PairingReport,
) -> Vec<TrainingTriple> {
    let mut neg_by: BTreeMap<Provenance, Vec<&str>> = BTreeMap::new();
    for (p, t) in negatives {
        neg_by.entry(*p).or_default().push(t);
    }
    let mut seen: BTreeMap<Provenance, usize> = BTreeMap::new();
    let mut fallback = 0usize;
    let mut out = Vec::new();
    for (p, pos) in positives {
        let i = seen.entry(*p).or_default();
        let neg = match neg_by.get(p) {
            Some(list) => list[*i % list.len()],
            None => {
                let pool: Vec<&str> = neg_by.values().flatten().copied().collect();
                if pool.is_empty() {
                    report.unpaired_positives += 1;
                    continue;
                }
                fallback += 1;
                pool[(fallback - 1) % pool.len()]
            }
        };
        *i += 1;
        *report.triples.entry(*p).or_default() += 1;
        out.push(TrainingTriple {
            qid: qid.to_string(),
            query: query.to_string(),
            pos: pos.clone(),
            neg: neg.to_string(),
            provenance: *p,
        });
    }
    out
}
