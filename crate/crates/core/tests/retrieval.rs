use proptest::prelude::*;
use quantir::rankers::{bm25, bm25_filter, qbm25, to_run_lines};
use quantir::trec::write_run_line;
use quantir::{
    Bm25Params, Collection, CorpusRecord, Extractor, IndexConfig, RankerConfig, SearchIndex,
};

const WORDS: [&str; 8] = [
    "laptop", "phone", "tablet", "camera", "cheap", "new", "used", "pro",
];

fn corpus_strategy() -> impl Strategy<Value = Vec<(Vec<usize>, Vec<u32>)>> {
    proptest::collection::vec(
        (
            proptest::collection::vec(0usize..WORDS.len(), 1..5),
            proptest::collection::vec(1u32..2_000, 0..3),
        ),
        1..40,
    )
}

fn build(docs: &[(Vec<usize>, Vec<u32>)]) -> SearchIndex {
    let records = docs
        .iter()
        .enumerate()
        .map(|(i, (words, values))| {
            let mut text: Vec<String> = words.iter().map(|&w| WORDS[w].to_string()).collect();
            for v in values {
                text.push(format!("sold for ${v} and"));
            }
            CorpusRecord::Sentence {
                sent_id: format!("s{i:03}"),
                text: text.join(" "),
                doc_id: None,
            }
        })
        .collect();
    let c = Collection::ingest(records, &Extractor::starter()).unwrap();
    SearchIndex::build(
        &c,
        IndexConfig {
            bm25: Bm25Params::default(),
            units: vec![],
        },
    )
    .unwrap()
}

fn query_text(words: &[usize], cond: usize, value: u32) -> String {
    let w: Vec<&str> = words.iter().map(|&i| WORDS[i]).collect();
    format!(
        "{} {} ${value}",
        w.join(" "),
        ["exactly", "over", "under"][cond]
    )
}

fn run_bytes(results: &[quantir::ScoredResult]) -> Vec<u8> {
    let mut buf = Vec::new();
    for l in to_run_lines("q", results) {
        write_run_line(&mut buf, &l).unwrap();
    }
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_bounded_and_normalised(
        docs in corpus_strategy(),
        words in proptest::collection::vec(0usize..WORDS.len(), 1..3),
        cond in 0usize..3,
        value in 1u32..2_000,
        alpha in 0.0f64..3.0,
    ) {
        let index = build(&docs);
        let q = Extractor::starter().parse_query("q", &query_text(&words, cond, value));
        prop_assert!(q.is_quantity_centric());
        let config = RankerConfig { alpha, ..Default::default() };
        for results in [bm25(&index, &q, &config), bm25_filter(&index, &q, &config), qbm25(&index, &q, &config)] {
            for r in &results {
                prop_assert!((0.0..=1.0).contains(&r.term_score));
                prop_assert!((0.0..=1.0).contains(&r.quantity_score));
                prop_assert!(r.score <= 1.0 + alpha + 1e-12);
            }
        }
        let plain = bm25(&index, &q, &config);
        if let Some(top) = plain.first() {
            prop_assert_eq!(top.term_score, 1.0);
        }
        // Normalisation is a positive scaling of raw BM25.
        let raw: Vec<f64> = plain
            .iter()
            .map(|r| index.terms.bm25(&q.lexical_terms, index.terms.position(&r.sent_id).unwrap()))
            .collect();
        prop_assert!(raw.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn term_only_qbm25_is_top_terms_search(
        docs in corpus_strategy(),
        words in proptest::collection::vec(0usize..WORDS.len(), 1..3),
    ) {
        let index = build(&docs);
        let text: Vec<&str> = words.iter().map(|&i| WORDS[i]).collect();
        let q = Extractor::starter().parse_query("q", &text.join(" "));
        prop_assert!(q.constraint.is_none());
        let r = qbm25(&index, &q, &RankerConfig::default());
        let t = index.terms.top_terms_search(&q.terms, 1000);
        let got: Vec<(&str, f64)> = r.iter().map(|r| (r.sent_id.as_str(), r.score)).collect();
        let want: Vec<(&str, f64)> = t.iter().map(|(s, v)| (s.as_str(), *v)).collect();
        prop_assert_eq!(got, want);
        prop_assert!(r.iter().all(|r| r.quantity_score == 0.0));
    }

    #[test]
    fn raising_alpha_never_demotes_best_qs(
        docs in corpus_strategy(),
        cond in 0usize..3,
        value in 1u32..2_000,
        a in 0.0f64..2.0,
        extra in 0.0f64..2.0,
    ) {
        // Equal term scores: one shared word, one occurrence each.
        let flat: Vec<(Vec<usize>, Vec<u32>)> = docs.into_iter().map(|(_, v)| (vec![0], v)).collect();
        let index = build(&flat);
        let q = Extractor::starter().parse_query("q", &query_text(&[0], cond, value));
        let rank_of_best = |alpha: f64| {
            let r = qbm25(&index, &q, &RankerConfig { alpha, ..Default::default() });
            let best = r.iter().map(|x| x.quantity_score).fold(0.0, f64::max);
            r.iter().position(|x| x.quantity_score == best && x.term_score == r[0].term_score)
        };
        if let (Some(lo), Some(hi)) = (rank_of_best(a), rank_of_best(a + extra)) {
            prop_assert!(hi <= lo);
        }
    }

    #[test]
    fn runs_are_deterministic_and_survive_persistence(
        docs in corpus_strategy(),
        cond in 0usize..3,
        value in 1u32..2_000,
    ) {
        let index = build(&docs);
        let q = Extractor::starter().parse_query("q", &query_text(&[0, 1], cond, value));
        let config = RankerConfig::default();
        let first = run_bytes(&qbm25(&index, &q, &config));
        prop_assert_eq!(&first, &run_bytes(&qbm25(&index, &q, &config)));
        let rebuilt = build(&docs);
        prop_assert_eq!(&first, &run_bytes(&qbm25(&rebuilt, &q, &config)));
        let mut buf = Vec::new();
        index.write_to(&mut buf).unwrap();
        let loaded = SearchIndex::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&first, &run_bytes(&qbm25(&loaded, &q, &config)));
    }

    #[test]
    fn candidates_match_brute_force(
        docs in corpus_strategy(),
        cond in 0usize..3,
        value in 1u32..2_000,
    ) {
        let index = build(&docs);
        let q = Extractor::starter().parse_query("q", &query_text(&[0], cond, value));
        let c = q.constraint.clone().unwrap();
        let mut got: Vec<u32> = index.quantities.candidates_for(c.condition, &c.quantity).into_iter().map(|(_, p)| p.sentence).collect();
        got.sort_unstable();
        got.dedup();
        let mut want = Vec::new();
        for (i, (_, values)) in docs.iter().enumerate() {
            let holds = values.iter().any(|&v| c.condition.holds(c.quantity.value, v.into()));
            if holds {
                want.push(index.quantities.position(&format!("s{i:03}")).unwrap());
            }
        }
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn bm25_monotone_in_tf(extra in 1usize..6, filler in 0usize..4) {
        // Two sentences of equal length differing only in how often "laptop" occurs.
        let fewer = [vec![0], vec![7; filler + extra]].concat();
        let more = [vec![0; 1 + extra], vec![7; filler]].concat();
        let index = build(&[(fewer, vec![]), (more, vec![]), (vec![1, 2], vec![])]);
        let q = vec!["laptop".to_string()];
        let s = |id: &str| index.terms.bm25(&q, index.terms.position(id).unwrap());
        prop_assert!(s("s001") >= s("s000"));
        prop_assert!(s("s000") > 0.0);
    }
}

#[test]
fn term_only_query_has_no_quantity_score_anywhere() {
    let index = build(&[(vec![0], vec![100]), (vec![0, 1], vec![50])]);
    let q = Extractor::starter().parse_query("q", "laptop");
    let config = RankerConfig::default();
    for r in bm25(&index, &q, &config)
        .into_iter()
        .chain(bm25_filter(&index, &q, &config))
        .chain(qbm25(&index, &q, &config))
    {
        assert_eq!(r.quantity_score, 0.0);
    }
    assert_eq!(bm25_filter(&index, &q, &config).len(), 2);
}
