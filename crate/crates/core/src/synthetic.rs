//! Seeded synthetic benchmark: a sentence corpus about a fixed set of
//! concepts, quantity-centric queries over it, and qrels derived from the
//! generator's own record of each sentence's concept and quantity.
//!
//! A sentence is relevant to a query when it is about the query concept and
//! states a quantity in the query unit that satisfies the query condition.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusRecord;
use crate::eval::Qrels;
use crate::types::{Condition, Decimal};

struct Topic {
    concept: &'static str,
    verb: &'static str,
    unit: &'static str,
    /// Renders an integer value with its unit surface.
    prefix: &'static str,
    suffix: &'static str,
    low: i64,
    step: i64,
}

const fn topic(
    concept: &'static str,
    verb: &'static str,
    unit: &'static str,
    prefix: &'static str,
    suffix: &'static str,
    low: i64,
    step: i64,
) -> Topic {
    Topic {
        concept,
        verb,
        unit,
        prefix,
        suffix,
        low,
        step,
    }
}

const TOPICS: &[Topic] = &[
    topic("electric scooter", "costs", "dollar", "$", "", 300, 50),
    topic("mountain bike", "costs", "dollar", "$", "", 600, 100),
    topic("espresso machine", "sells for", "dollar", "$", "", 150, 25),
    topic("gaming laptop", "retails at", "dollar", "$", "", 900, 100),
    topic("standing desk", "costs", "euro", "€", "", 250, 25),
    topic("robot vacuum", "sells for", "euro", "€", "", 180, 20),
    topic(
        "hiking backpack",
        "costs",
        "pound-sterling",
        "£",
        "",
        60,
        10,
    ),
    topic(
        "office chair",
        "retails at",
        "pound-sterling",
        "£",
        "",
        120,
        15,
    ),
    topic("cargo drone", "weighs", "kilogram", "", " kg", 4, 1),
    topic("washing machine", "weighs", "kilogram", "", " kg", 55, 3),
    topic("camping tent", "weighs", "kilogram", "", " kg", 2, 1),
    topic("steel beam", "weighs", "tonne", "", " tonnes", 2, 1),
    topic(
        "sports car",
        "reaches",
        "kilometre-per-hour",
        "",
        " km/h",
        220,
        10,
    ),
    topic(
        "delivery van",
        "reaches",
        "kilometre-per-hour",
        "",
        " km/h",
        110,
        5,
    ),
    topic("speedboat", "reaches", "mile-per-hour", "", " mph", 40, 5),
    topic("pickup truck", "produces", "horsepower", "", " hp", 250, 20),
    topic(
        "diesel tractor",
        "produces",
        "horsepower",
        "",
        " hp",
        90,
        10,
    ),
    topic(
        "wind turbine",
        "generates",
        "kilowatt",
        "",
        " kW",
        1500,
        250,
    ),
    topic("heat pump", "draws", "kilowatt", "", " kW", 3, 1),
    topic("microwave oven", "draws", "watt", "", " watts", 700, 100),
    topic("memory card", "stores", "gigabyte", "", " GB", 16, 16),
    topic("cloud backup plan", "includes", "terabyte", "", " TB", 1, 1),
    topic("smartphone camera", "records", "megabyte", "", " MB", 12, 4),
    topic("savings account", "yields", "percent", "", "%", 1, 1),
    topic("bond fund", "returned", "percent", "", "%", 2, 1),
    topic("marathon route", "covers", "kilometre", "", " km", 38, 1),
    topic("cycling trail", "covers", "mile", "", " miles", 12, 4),
    topic(
        "suspension bridge",
        "spans",
        "metre",
        "",
        " metres",
        400,
        100,
    ),
    topic("office tower", "rises", "foot", "", " feet", 500, 50),
    topic(
        "television screen",
        "measures",
        "inch",
        "",
        " inches",
        40,
        5,
    ),
    topic("battery pack", "lasts", "hour", "", " hours", 6, 2),
    topic("ferry crossing", "takes", "minute", "", " minutes", 30, 10),
    topic("sourdough starter", "ferments", "day", "", " days", 3, 1),
    topic("warranty plan", "runs", "year", "", " years", 1, 1),
    topic(
        "freezer compartment",
        "holds",
        "degree-celsius",
        "",
        "°C",
        -24,
        2,
    ),
    topic(
        "pizza oven",
        "reaches",
        "degree-fahrenheit",
        "",
        "°F",
        500,
        50,
    ),
    topic("vitamin tablet", "contains", "milligram", "", " mg", 50, 50),
    topic("protein bar", "packs", "gram", "", " grams", 10, 5),
    topic(
        "mortgage rate",
        "moved",
        "basis-point",
        "",
        " basis points",
        10,
        5,
    ),
    topic(
        "chip maker",
        "earned",
        "cent-per-share",
        "",
        " cents per share",
        10,
        4,
    ),
];

const FILLERS: &[&str] = &[
    "according to the latest survey",
    "in the spring catalogue",
    "based on figures from the manufacturer",
    "after the redesign",
    "in independent tests",
    "as reported by several reviewers",
    "this season",
    "in the standard configuration",
    "per the dealer listing",
    "following last year's update",
    "",
    "",
];

const DISTRACTORS: &[&str] = &[
    "Reviewers praised the {c} for its build quality.",
    "Demand for the {c} grew steadily across Europe.",
    "The {c} remains a popular choice among first-time buyers.",
    "Critics say the {c} still has room for improvement.",
    "Several retailers stocked the {c} ahead of the holidays.",
    "The new {c} design drew attention at the trade fair.",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFact {
    pub sent_id: String,
    pub topic: usize,
    pub unit: String,
    pub value: Decimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticQuery {
    pub qid: String,
    pub text: String,
    pub topic: usize,
    pub condition: Condition,
    pub value: Decimal,
    pub unit: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub records: Vec<CorpusRecord>,
    pub facts: Vec<SyntheticFact>,
    pub queries: Vec<SyntheticQuery>,
    pub qrels: Qrels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Sentences stating a quantity, per concept.
    pub quantity_sentences: usize,
    /// Sentences mentioning the concept without a quantity, per concept.
    pub distractor_sentences: usize,
    pub queries_per_condition: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            quantity_sentences: 45,
            distractor_sentences: 10,
            queries_per_condition: 20,
        }
    }
}

pub fn concept_count() -> usize {
    TOPICS.len()
}

fn render(t: &Topic, v: i64) -> String {
    format!("{}{}{}", t.prefix, v, t.suffix)
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Generates the benchmark. Each concept draws its values from twelve
/// evenly spaced levels so that equality queries have several matches.
pub fn generate(config: &SyntheticConfig) -> SyntheticBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut facts = Vec::new();
    let mut values_by_topic: Vec<Vec<i64>> = vec![Vec::new(); TOPICS.len()];

    for (ti, t) in TOPICS.iter().enumerate() {
        let doc = format!("syn{ti:02}");
        let mut lines: Vec<(String, Option<i64>)> = Vec::new();
        for _ in 0..config.quantity_sentences {
            let v = t.low + t.step * rng.gen_range(0..12);
            let filler = FILLERS.choose(&mut rng).expect("fillers");
            let det = if rng.gen_bool(0.5) {
                "The"
            } else {
                "This year's"
            };
            let mut text = format!("{det} {} {} {}", t.concept, t.verb, render(t, v));
            if !filler.is_empty() {
                text.push(' ');
                text.push_str(filler);
            }
            text.push('.');
            lines.push((text, Some(v)));
        }
        for _ in 0..config.distractor_sentences {
            let d = DISTRACTORS.choose(&mut rng).expect("distractors");
            lines.push((capitalise(&d.replace("{c}", t.concept)), None));
        }
        lines.shuffle(&mut rng);
        for (i, (text, v)) in lines.into_iter().enumerate() {
            let sent_id = format!("{doc}#{i}");
            if let Some(v) = v {
                values_by_topic[ti].push(v);
                facts.push(SyntheticFact {
                    sent_id: sent_id.clone(),
                    topic: ti,
                    unit: t.unit.to_string(),
                    value: Decimal::from(v),
                });
            }
            records.push(CorpusRecord::Sentence {
                sent_id,
                text,
                doc_id: Some(doc.clone()),
            });
        }
    }

    let mut queries = Vec::new();
    for (ci, condition) in Condition::ALL.into_iter().enumerate() {
        let surfaces: &[&str] = match condition {
            Condition::Equal => &["exactly", "equals", "at"],
            Condition::Greater => &["more than", "above", "over"],
            Condition::Less => &["less than", "below", "under"],
        };
        for i in 0..config.queries_per_condition {
            let ti = (i * 2 + ci * 13) % TOPICS.len();
            let t = &TOPICS[ti];
            let mut vals = values_by_topic[ti].clone();
            if vals.is_empty() {
                continue;
            }
            vals.sort_unstable();
            let v = match condition {
                Condition::Equal => *vals.choose(&mut rng).expect("non-empty"),
                // About a third of the concept's sentences satisfy the bound.
                Condition::Greater => vals[vals.len() * 2 / 3],
                Condition::Less => vals[vals.len() / 3],
            };
            let surface = surfaces[i % surfaces.len()];
            queries.push(SyntheticQuery {
                qid: format!("syn-{}-{:02}", condition.as_str(), i + 1),
                text: format!("{} {surface} {}", t.concept, render(t, v)),
                topic: ti,
                condition,
                value: Decimal::from(v),
                unit: t.unit.to_string(),
            });
        }
    }

    let mut qrels = Qrels::default();
    for q in &queries {
        qrels.add_query(&q.qid);
        for f in facts
            .iter()
            .filter(|f| f.topic == q.topic && f.unit == q.unit)
        {
            if q.condition.holds(q.value, f.value) {
                qrels.insert(&q.qid, &f.sent_id);
            }
        }
    }

    SyntheticBenchmark {
        records,
        facts,
        queries,
        qrels,
    }
}
