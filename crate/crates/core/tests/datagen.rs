use std::str::FromStr;

use quantir::datagen::*;
use quantir::{Collection, Condition, CorpusRecord, Decimal, Extractor, Sentence, UnitCatalog};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn d(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

fn collection(texts: &[&str]) -> Collection {
    let records = texts
        .iter()
        .enumerate()
        .map(|(i, t)| CorpusRecord::Sentence {
            sent_id: format!("s{i:02}"),
            text: t.to_string(),
            doc_id: None,
        })
        .collect();
    Collection::ingest(records, &Extractor::starter()).unwrap()
}

const CANNABIS: [&str; 8] = [
    "The cannabis company lost 0.9 of a cent per share in the quarter.",
    "The cannabis company lost 1.4 cents per share a year earlier.",
    "The cannabis company lost 17 cents per share for the quarter ended Jan. 31.",
    "The cannabis company lost 17 cents per share in the second quarter.",
    "The cannabis company earned 22 cents per share last year.",
    "The cannabis company earned 26 cents per share in 2019.",
    "The cannabis company earned 35 cents per share after the merger.",
    "The cannabis company earned 84 cents per share in its best quarter.",
];

fn cannabis() -> (Collection, ConceptUnitIndex) {
    let c = collection(&CANNABIS);
    let idx = ConceptUnitIndex::build(c.sentences(), &Extractor::starter());
    (c, idx)
}

fn texts_with(c: &Collection, ids: &[&Sentence]) -> Vec<String> {
    ids.iter()
        .map(|s| c.get(&s.sent_id).unwrap().text.clone())
        .collect()
}

#[test]
fn concept_unit_index_keeps_duplicates() {
    let (_, idx) = cannabis();
    let e = idx.get("cannabis company", "cent-per-share").unwrap();
    let mut vals = e.values.clone();
    vals.sort();
    let expected: Vec<Decimal> = ["0.9", "1.4", "17", "17", "22", "26", "35", "84"]
        .iter()
        .map(|v| d(v))
        .collect();
    assert_eq!(vals, expected);
    assert_eq!(e.sentences.len(), 8);
}

#[test]
fn sentences_without_concept_go_to_empty_concept() {
    let c = collection(&["$5 was paid."]);
    let idx = ConceptUnitIndex::build(c.sentences(), &Extractor::starter());
    assert!(idx.get("", "dollar").is_some());
    let mut stats = DatagenStats::default();
    let q = generate_queries(
        &idx,
        &c,
        &Extractor::starter(),
        &StaticExpansions::default(),
        &DatagenConfig::default(),
        &mut stats,
    )
    .unwrap();
    assert!(q.is_empty());
    assert_eq!(stats.pairs_without_concept, 1);
}

#[test]
fn split_examples() {
    let (c, idx) = cannabis();
    let e = idx.get("cannabis company", "cent-per-share").unwrap();
    let sents: Vec<&Sentence> = e.sentences.iter().map(|id| c.get(id).unwrap()).collect();
    let (pos, neg) = split_by_condition(
        sents.iter().copied(),
        Condition::Greater,
        d("26"),
        "cent-per-share",
    );
    assert_eq!(texts_with(&c, &pos), [CANNABIS[6], CANNABIS[7]]);
    assert_eq!(neg.len(), 6);
    let (pos, _) = split_by_condition(
        sents.iter().copied(),
        Condition::Equal,
        d("17"),
        "cent-per-share",
    );
    assert_eq!(texts_with(&c, &pos), [CANNABIS[2], CANNABIS[3]]);

    let other = collection(&["The cannabis company paid $17 in fees."]);
    let (pos, neg) = split_by_condition(
        other.sentences(),
        Condition::Equal,
        d("17"),
        "cent-per-share",
    );
    assert!(pos.is_empty());
    assert_eq!(neg.len(), 1);
}

#[test]
fn original_sampling_downsamples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, n) = sample_original(&["a"], &["x", "y", "z"], 2, &mut rng);
    assert_eq!((p.len(), n.len()), (1, 1));
    let (p, n) = sample_original(&["a", "b"], &["x", "y"], 0, &mut rng);
    assert!(p.is_empty() && n.is_empty());
    let draw = |seed| {
        sample_original(
            &[1, 2, 3, 4, 5],
            &[6, 7, 8, 9],
            2,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
    };
    assert_eq!(draw(7), draw(7));
}

#[test]
fn unit_permutation_rewrites_surfaces() {
    let c = collection(&["The iPhone XR reached €236.50 in March."]);
    let s: Vec<&Sentence> = c.sentences().iter().collect();
    let catalog = UnitCatalog::starter();
    let extractor = Extractor::starter();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pos, neg) = permute_units(&s, "euro", &catalog, 2, &mut rng);
        assert_eq!(pos.len(), 1);
        assert!(!pos[0].contains('€'));
        let q = &extractor.quantities(&pos[0])[0];
        assert_eq!((q.unit.as_str(), q.value), ("euro", d("236.5")));
        assert_eq!(neg.len(), 1);
        let q = &extractor.quantities(&neg[0])[0];
        assert_ne!(q.unit, "euro");
        assert_eq!(catalog.get(&q.unit).unwrap().family, "currency");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (pos, _) = permute_units(&s, "euro", &catalog, 2, &mut rng);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(permute_units(&s, "euro", &catalog, 2, &mut rng).0, pos);
}

#[test]
fn unit_permutation_needs_family_members() {
    let catalog = UnitCatalog::from_json(
        r#"[{"canonical":"widget","family":"things","suffix_surfaces":["widgets","wdg"]}]"#,
    )
    .unwrap();
    let e = Extractor::new(catalog.clone(), Default::default());
    let c = Collection::ingest(
        vec![CorpusRecord::Sentence {
            sent_id: "a".into(),
            text: "It holds 5 widgets".into(),
            doc_id: None,
        }],
        &e,
    )
    .unwrap();
    let s: Vec<&Sentence> = c.sentences().iter().collect();
    let (pos, neg) = permute_units(&s, "widget", &catalog, 2, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(pos, ["It holds 5 wdg"]);
    assert!(neg.is_empty());
}

#[test]
fn value_permutation_uses_observed_values() {
    let (c, idx) = cannabis();
    let e = idx.get("cannabis company", "cent-per-share").unwrap();
    let sents: Vec<&Sentence> = e.sentences.iter().map(|id| c.get(id).unwrap()).collect();
    let (plus, minus) = split_by_condition(
        sents.iter().copied(),
        Condition::Greater,
        d("26"),
        "cent-per-share",
    );
    let extractor = Extractor::starter();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (pos, neg) = permute_values(
        &plus,
        &minus,
        &e.values,
        Condition::Greater,
        d("26"),
        "cent-per-share",
        10,
        &mut rng,
    );
    assert_eq!(pos.len(), 6);
    assert_eq!(neg.len(), 2);
    for t in &pos {
        let v = extractor.quantities(t)[0].value;
        assert!(v == d("35") || v == d("84"), "{t}");
    }
    for t in &neg {
        let v = extractor.quantities(t)[0].value;
        assert!(v <= d("26") && e.values.contains(&v), "{t}");
    }

    let all_high = [d("35"), d("84")];
    let (_, neg) = permute_values(
        &plus,
        &minus,
        &all_high,
        Condition::Greater,
        d("26"),
        "cent-per-share",
        10,
        &mut rng,
    );
    assert!(neg.is_empty());
}

#[test]
fn pairing_policy() {
    let pos = vec![
        (Provenance::Original, "p1".to_string()),
        (Provenance::Original, "p2".to_string()),
    ];
    let neg = vec![
        (Provenance::Original, "n1".to_string()),
        (Provenance::Original, "n2".to_string()),
    ];
    let mut report = PairingReport::default();
    let t = aggregate_samples("q", "query", &pos, &neg, &mut report);
    assert_eq!(t.len(), 2);
    assert_eq!((t[0].neg.as_str(), t[1].neg.as_str()), ("n1", "n2"));
    assert_eq!(report.triples[&Provenance::Original], 2);

    let pos = vec![
        (Provenance::UnitPerm, "u1".to_string()),
        (Provenance::UnitPerm, "u2".to_string()),
    ];
    let t = aggregate_samples("q", "query", &pos, &neg, &mut report);
    assert_eq!((t[0].neg.as_str(), t[1].neg.as_str()), ("n1", "n2"));
    assert!(t.iter().all(|t| t.provenance == Provenance::UnitPerm));

    let t = aggregate_samples("q", "query", &pos, &[], &mut report);
    assert!(t.is_empty());
    assert_eq!(report.unpaired_positives, 2);
}

#[test]
fn generated_queries_follow_template() {
    let (c, idx) = cannabis();
    let extractor = Extractor::starter();
    let mut stats = DatagenStats::default();
    let queries = generate_queries(
        &idx,
        &c,
        &extractor,
        &StaticExpansions::default(),
        &DatagenConfig::default(),
        &mut stats,
    )
    .unwrap();
    assert_eq!(stats.dropped_queries, 0);
    assert_eq!(queries.len(), 6);
    for q in &queries {
        assert!(extractor
            .conditions()
            .surfaces(q.condition)
            .contains(&q.condition_surface));
        assert!(q
            .text
            .starts_with(&format!("cannabis company {} ", q.condition_surface)));
        assert!(idx
            .get("cannabis company", "cent-per-share")
            .unwrap()
            .values
            .contains(&q.value));
    }
    let peak = |cond| {
        queries
            .iter()
            .find(|q| q.condition == cond && q.origin == QueryOrigin::PeakMean)
            .unwrap()
            .value
    };
    assert_eq!(peak(Condition::Equal), d("17"));
    assert_eq!(peak(Condition::Greater), d("26"));
}

#[test]
fn expanded_concepts_get_their_own_queries() {
    let c = collection(&[
        "Disney+ charges $6.99 a month.",
        "Disney+ charges $7.99 a month now.",
        "Disney+ charges $12.99 with ads removed.",
    ]);
    let out = generate(
        &c,
        &Extractor::starter(),
        &StaticExpansions::starter(),
        &DatagenConfig::default(),
    )
    .unwrap();
    let expanded: Vec<&GeneratedQuery> = out
        .queries
        .iter()
        .filter(|q| q.origin == QueryOrigin::Expanded)
        .collect();
    assert!(!expanded.is_empty());
    for q in expanded {
        assert!(q.text.starts_with("streaming platform "));
        assert_eq!(q.source_concept, "Disney+");
    }
}

#[test]
fn strategy_switches() {
    let (c, _) = cannabis();
    let extractor = Extractor::starter();
    let mut config = DatagenConfig {
        strategies: Strategies {
            original: true,
            unit_permutation: false,
            value_permutation: false,
            concept_expansion: false,
        },
        ..DatagenConfig::default()
    };
    let out = generate(&c, &extractor, &StaticExpansions::default(), &config).unwrap();
    assert!(!out.triples.is_empty());
    assert!(out
        .triples
        .iter()
        .all(|t| t.provenance == Provenance::Original));
    config.strategies.value_permutation = true;
    let out = generate(&c, &extractor, &StaticExpansions::default(), &config).unwrap();
    assert!(out
        .triples
        .iter()
        .any(|t| t.provenance == Provenance::ValuePerm));
}

#[test]
fn jsonl_output() {
    let (c, _) = cannabis();
    let out = generate(
        &c,
        &Extractor::starter(),
        &StaticExpansions::default(),
        &DatagenConfig::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_queries(&mut buf, &out.queries).unwrap();
    let first: serde_json::Value =
        serde_json::from_str(String::from_utf8(buf).unwrap().lines().next().unwrap()).unwrap();
    for key in [
        "qid",
        "text",
        "concept",
        "condition",
        "value",
        "unit",
        "origin",
    ] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert!(first["value"].is_string());
    let mut buf = Vec::new();
    write_triples(&mut buf, &out.triples).unwrap();
    let first: serde_json::Value =
        serde_json::from_str(String::from_utf8(buf).unwrap().lines().next().unwrap()).unwrap();
    for key in ["qid", "query", "pos", "neg", "provenance"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}
