//! Score fusion over the term and quantity indexes.
//!
//! All rankers return [`ScoredResult`]s whose `score` is the max-normalised
//! term score plus `alpha * quantity_score` where the ranker's gate is open.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::UnitCatalog;
use crate::index::SearchIndex;
use crate::phi::PhiSet;
use crate::trec::RunLine;
use crate::types::QuantityQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankerKind {
    Bm25,
    Bm25Filter,
    Qbm25,
    RerankTopk,
    RerankGated,
}

impl RankerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RankerKind::Bm25 => "bm25",
            RankerKind::Bm25Filter => "bm25-filter",
            RankerKind::Qbm25 => "qbm25",
            RankerKind::RerankTopk => "rerank-topk",
            RankerKind::RerankGated => "rerank-gated",
        }
    }
}

impl fmt::Display for RankerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bm25" => Ok(RankerKind::Bm25),
            "bm25-filter" | "bm25_filter" => Ok(RankerKind::Bm25Filter),
            "qbm25" => Ok(RankerKind::Qbm25),
            "rerank-topk" => Ok(RankerKind::RerankTopk),
            "rerank-gated" => Ok(RankerKind::RerankGated),
            other => Err(format!("unknown ranker `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredResult {
    pub sent_id: String,
    pub term_score: f64,
    pub quantity_score: f64,
    pub score: f64,
    pub ranker: RankerKind,
}

#[derive(Debug, Clone)]
pub struct RankerConfig {
    pub alpha: f64,
    pub depth: usize,
    pub phi: PhiSet,
    /// Set to compare quantities across units of one family.
    pub convert_units: Option<UnitCatalog>,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            alpha: 1.0,
            depth: 1000,
            phi: PhiSet::default(),
            convert_units: None,
        }
    }
}

fn by_score_then_id(a: &ScoredResult, b: &ScoredResult) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.sent_id.cmp(&b.sent_id))
}

fn normalised(raw: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    let max = raw.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    raw.into_iter()
        .map(|(s, v)| (s, if max > 0.0 { v / max } else { 0.0 }))
        .collect()
}

fn quantity_score(
    index: &SearchIndex,
    sent_id: &str,
    query: &QuantityQuery,
    config: &RankerConfig,
) -> f64 {
    let Some(c) = &query.constraint else {
        return 0.0;
    };
    let Some(pos) = index.quantities.position(sent_id) else {
        return 0.0;
    };
    index.quantities.quantity_score(
        pos,
        c.condition,
        &c.quantity,
        &config.phi,
        config.convert_units.as_ref(),
    )
}

/// Normalised BM25 over the query's lexical terms, quantities ignored.
pub fn bm25(
    index: &SearchIndex,
    query: &QuantityQuery,
    config: &RankerConfig,
) -> Vec<ScoredResult> {
    let mut out: Vec<ScoredResult> = normalised(index.terms.score_all(&query.lexical_terms))
        .into_iter()
        .map(|(s, v)| ScoredResult {
            sent_id: index.terms.sent_id(s).to_string(),
            term_score: v,
            quantity_score: 0.0,
            score: v,
            ranker: RankerKind::Bm25,
        })
        .collect();
    out.sort_by(by_score_then_id);
    out.truncate(config.depth);
    out
}

/// BM25 with every sentence dropped that holds no quantity in the query
/// unit satisfying the query condition.
pub fn bm25_filter(
    index: &SearchIndex,
    query: &QuantityQuery,
    config: &RankerConfig,
) -> Vec<ScoredResult> {
    let mut all = bm25(
        index,
        query,
        &RankerConfig {
            depth: usize::MAX,
            ..config.clone()
        },
    );
    if let Some(c) = &query.constraint {
        let keep: std::collections::HashSet<u32> = index
            .quantities
            .candidates_for(c.condition, &c.quantity)
            .into_iter()
            .map(|(_, p)| p.sentence)
            .collect();
        all.retain(|r| {
            index
                .quantities
                .position(&r.sent_id)
                .is_some_and(|p| keep.contains(&p))
        });
    }
    for r in &mut all {
        r.ranker = RankerKind::Bm25Filter;
    }
    all.truncate(config.depth);
    all
}

/// Normalised BM25 over the query terms plus `alpha * qs` for every
/// sentence matching at least one term. Sentences without a term match are
/// not retrieved.
pub fn qbm25(
    index: &SearchIndex,
    query: &QuantityQuery,
    config: &RankerConfig,
) -> Vec<ScoredResult> {
    let mut out: Vec<ScoredResult> = normalised(index.terms.score_all(&query.terms))
        .into_iter()
        .map(|(s, term_score)| {
            let sent_id = index.terms.sent_id(s).to_string();
            let qs = quantity_score(index, &sent_id, query, config);
            ScoredResult {
                score: term_score + config.alpha * qs,
                sent_id,
                term_score,
                quantity_score: qs,
                ranker: RankerKind::Qbm25,
            }
        })
        .collect();
    out.sort_by(by_score_then_id);
    out.truncate(config.depth);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RerankMode {
    /// Every candidate receives the quantity bonus.
    Topk,
    /// Only candidates flagged as matching receive it.
    Gated,
}

impl FromStr for RerankMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "topk" => Ok(RerankMode::Topk),
            "gated" => Ok(RerankMode::Gated),
            other => Err(format!("unknown rerank mode `{other}`")),
        }
    }
}

/// Re-scores an upstream candidate list: raw scores divided by their max,
/// plus `alpha * qs` (gated by the candidates' match flags in gated mode).
/// Candidates keep their input order on equal scores.
pub fn rerank_external(
    index: &SearchIndex,
    query: &QuantityQuery,
    candidates: &[RunLine],
    mode: RerankMode,
    config: &RankerConfig,
) -> Vec<ScoredResult> {
    let mut mode = mode;
    if mode == RerankMode::Gated
        && candidates.iter().all(|c| c.matched.is_none())
        && !candidates.is_empty()
    {
        log::warn!(
            "query {}: run has no match flags, gated rerank falls back to topk",
            query.qid
        );
        mode = RerankMode::Topk;
    }
    let ranker = match mode {
        RerankMode::Topk => RankerKind::RerankTopk,
        RerankMode::Gated => RankerKind::RerankGated,
    };
    let max = candidates
        .iter()
        .map(|c| c.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<ScoredResult> = candidates
        .iter()
        .map(|c| {
            let term_score = if max > 0.0 { c.score / max } else { 0.0 };
            let gate = match mode {
                RerankMode::Topk => true,
                RerankMode::Gated => c.matched.unwrap_or(false),
            };
            let qs = quantity_score(index, &c.sent_id, query, config);
            let bonus = if gate { config.alpha * qs } else { 0.0 };
            ScoredResult {
                sent_id: c.sent_id.clone(),
                term_score,
                quantity_score: qs,
                score: term_score + bonus,
                ranker,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(config.depth);
    out
}

/// Ranks with the given kind; rerank kinds need candidates and are not
/// handled here.
pub fn rank(
    kind: RankerKind,
    index: &SearchIndex,
    query: &QuantityQuery,
    config: &RankerConfig,
) -> Option<Vec<ScoredResult>> {
    match kind {
        RankerKind::Bm25 => Some(bm25(index, query, config)),
        RankerKind::Bm25Filter => Some(bm25_filter(index, query, config)),
        RankerKind::Qbm25 => Some(qbm25(index, query, config)),
        RankerKind::RerankTopk | RankerKind::RerankGated => None,
    }
}

/// Results as TREC run lines, ranks from 1.
pub fn to_run_lines(qid: &str, results: &[ScoredResult]) -> Vec<RunLine> {
    results
        .iter()
        .enumerate()
        .map(|(i, r)| RunLine {
            qid: qid.to_string(),
            sent_id: r.sent_id.clone(),
            rank: i + 1,
            score: r.score,
            tag: r.ranker.as_str().to_string(),
            matched: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Collection, CorpusRecord};
    use crate::extractor::Extractor;
    use crate::index::IndexConfig;
    use crate::term_index::Bm25Params;

    fn index(texts: &[(&str, &str)]) -> SearchIndex {
        let records = texts
            .iter()
            .map(|(id, t)| CorpusRecord::Sentence {
                sent_id: id.to_string(),
                text: t.to_string(),
                doc_id: None,
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

    fn ids(r: &[ScoredResult]) -> Vec<&str> {
        r.iter().map(|r| r.sent_id.as_str()).collect()
    }

    fn laptops() -> SearchIndex {
        index(&[
            ("a", "laptop sold for 850 dollar"),
            ("b", "laptop sold for 899 dollar"),
            ("c", "laptop sold for 950 dollar"),
            ("d", "laptop sold for 700 dollar"),
            ("e", "phone sold for 800 dollar"),
        ])
    }

    #[test]
    fn qbm25_orders_by_proximity_under_bound() {
        let idx = laptops();
        let q = Extractor::starter().parse_query("q", "laptop under 900 dollar");
        let r = qbm25(&idx, &q, &RankerConfig::default());
        assert_eq!(ids(&r), ["b", "a", "d", "c"]);
        assert!((r[0].score - (1.0 + 899.0 / 900.0)).abs() < 1e-12);
        assert_eq!(r[3].quantity_score, 0.0);
    }

    #[test]
    fn alpha_zero_is_bm25_over_query_terms() {
        let idx = laptops();
        let q = Extractor::starter().parse_query("q", "laptop under 900 dollar");
        let cfg = RankerConfig {
            alpha: 0.0,
            ..RankerConfig::default()
        };
        let r = qbm25(&idx, &q, &cfg);
        let expected = idx.terms.top_terms_search(&q.terms, 1000);
        let got: Vec<(String, f64)> = r.iter().map(|r| (r.sent_id.clone(), r.score)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn no_bonus_without_term_match() {
        let idx = laptops();
        let q = Extractor::starter().parse_query("q", "laptop under 900 dollar");
        let r = qbm25(&idx, &q, &RankerConfig::default());
        assert!(!ids(&r).contains(&"e"));
    }

    #[test]
    fn filter_keeps_sentence_with_one_satisfying_quantity() {
        let idx = index(&[
            ("both", "The iPhone XR reached 236.5 euro and then 132 euro"),
            ("high", "The iPhone XR reached 236.5 euro"),
        ]);
        let q = Extractor::starter().parse_query("q", "iPhone XR less than 200 euro");
        assert_eq!(
            ids(&bm25_filter(&idx, &q, &RankerConfig::default())),
            ["both"]
        );
        let plain = Extractor::starter().parse_query("q", "iPhone XR");
        assert_eq!(
            ids(&bm25_filter(&idx, &plain, &RankerConfig::default())),
            ids(&bm25(&idx, &plain, &RankerConfig::default()))
        );
    }

    fn line(id: &str, rank: usize, score: f64, matched: Option<bool>) -> RunLine {
        RunLine {
            qid: "q".into(),
            sent_id: id.into(),
            rank,
            score,
            tag: "ext".into(),
            matched,
        }
    }

    #[test]
    fn rerank_flips_gap() {
        let idx = index(&[("x", "laptop 950 dollar"), ("y", "laptop 132 dollar")]);
        let q = Extractor::starter().parse_query("q", "laptop less than 200 dollar");
        let run = [line("x", 1, 8.0, None), line("y", 2, 4.0, None)];
        let r = rerank_external(&idx, &q, &run, RerankMode::Topk, &RankerConfig::default());
        assert_eq!(ids(&r), ["y", "x"]);
        assert!((r[0].score - 1.16).abs() < 1e-12);
        assert_eq!(r[1].score, 1.0);
    }

    #[test]
    fn gated_rerank_respects_flags() {
        let idx = index(&[("x", "laptop 950 dollar"), ("y", "laptop 132 dollar")]);
        let q = Extractor::starter().parse_query("q", "laptop less than 200 dollar");
        let run = [
            line("x", 1, 8.0, Some(true)),
            line("y", 2, 4.0, Some(false)),
        ];
        let r = rerank_external(&idx, &q, &run, RerankMode::Gated, &RankerConfig::default());
        assert_eq!(ids(&r), ["x", "y"]);
        assert_eq!(r[0].ranker, RankerKind::RerankGated);
        let unflagged = [line("x", 1, 8.0, None), line("y", 2, 4.0, None)];
        let r = rerank_external(
            &idx,
            &q,
            &unflagged,
            RerankMode::Gated,
            &RankerConfig::default(),
        );
        assert_eq!(r[0].ranker, RankerKind::RerankTopk);
    }

    #[test]
    fn rerank_edge_cases() {
        let idx = index(&[("x", "laptop")]);
        let q = Extractor::starter().parse_query("q", "laptop");
        assert!(
            rerank_external(&idx, &q, &[], RerankMode::Topk, &RankerConfig::default()).is_empty()
        );
        let zero = [line("x", 1, 0.0, None), line("unknown", 2, -3.0, None)];
        let r = rerank_external(&idx, &q, &zero, RerankMode::Topk, &RankerConfig::default());
        assert_eq!(ids(&r), ["x", "unknown"]);
        assert!(r.iter().all(|r| r.score == 0.0));
    }
}
