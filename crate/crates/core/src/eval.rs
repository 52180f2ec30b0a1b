//! Ranking metrics, paired significance testing and corpus masking.
//!
//! Relevance is binary: a qrels line with relevance above 0 marks a
//! relevant sentence. Metrics follow trec_eval conventions: precision
//! divides by k even for short runs, NDCG uses gains of 1 discounted by
//! `log2(rank + 1)` against an ideal ranking clipped at k.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractor::Extractor;
use crate::trec::{QrelLine, Run};
use crate::types::{Sentence, Span};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    relevant: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    /// Every qid in `lines` is a query, including ones judged only
    /// non-relevant.
    pub fn from_lines(lines: &[QrelLine]) -> Self {
        let mut relevant: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for l in lines {
            let set = relevant.entry(l.qid.clone()).or_default();
            if l.relevance > 0 {
                set.insert(l.sent_id.clone());
            }
        }
        Qrels { relevant }
    }

    pub fn insert(&mut self, qid: &str, sent_id: &str) {
        self.relevant
            .entry(qid.to_string())
            .or_default()
            .insert(sent_id.to_string());
    }

    pub fn add_query(&mut self, qid: &str) {
        self.relevant.entry(qid.to_string()).or_default();
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.relevant.keys().map(String::as_str)
    }

    pub fn relevant(&self, qid: &str) -> Option<&BTreeSet<String>> {
        self.relevant.get(qid)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }

    /// Judged (qid, sent_id) pairs for which `known` is false.
    pub fn unresolved(&self, known: impl Fn(&str) -> bool) -> Vec<(&str, &str)> {
        self.relevant
            .iter()
            .flat_map(|(q, set)| set.iter().map(move |s| (q.as_str(), s.as_str())))
            .filter(|(_, s)| !known(s))
            .collect()
    }
}

fn hits(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> usize {
    ranking
        .iter()
        .take(k)
        .filter(|s| relevant.contains(*s))
        .count()
}

pub fn precision_at(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    hits(ranking, relevant, k) as f64 / k as f64
}

pub fn mrr_at(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    ranking
        .iter()
        .take(k)
        .position(|s| relevant.contains(s))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

pub fn ndcg_at(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, s)| relevant.contains(*s))
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal: f64 = (1..=relevant.len().min(k)).map(discount).sum();
    if ideal > 0.0 {
        dcg / ideal
    } else {
        0.0
    }
}

/// `None` when the query has no relevant sentences.
pub fn recall_at(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    Some(hits(ranking, relevant, k) as f64 / relevant.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub qid: String,
    pub p10: f64,
    pub mrr10: f64,
    pub ndcg10: f64,
    pub r100: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub queries: usize,
    pub p10: f64,
    pub mrr10: f64,
    pub ndcg10: f64,
    pub r100: f64,
    /// Queries contributing to `r100`.
    pub recall_queries: usize,
}

impl MeanMetrics {
    pub fn of<'a>(per_query: impl IntoIterator<Item = &'a QueryMetrics>) -> Self {
        let mut m = MeanMetrics::default();
        for q in per_query {
            m.queries += 1;
            m.p10 += q.p10;
            m.mrr10 += q.mrr10;
            m.ndcg10 += q.ndcg10;
            if let Some(r) = q.r100 {
                m.recall_queries += 1;
                m.r100 += r;
            }
        }
        if m.queries > 0 {
            let n = m.queries as f64;
            m.p10 /= n;
            m.mrr10 /= n;
            m.ndcg10 /= n;
        }
        if m.recall_queries > 0 {
            m.r100 /= m.recall_queries as f64;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub queries: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
}

impl LatencyStats {
    /// Mean and nearest-rank 95th percentile.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1);
        Some(LatencyStats {
            queries: sorted.len(),
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p95_ms: sorted[rank - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub per_query: Vec<QueryMetrics>,
    pub mean: MeanMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyStats>,
}

impl RunMetrics {
    pub fn get(&self, qid: &str) -> Option<&QueryMetrics> {
        self.per_query.iter().find(|q| q.qid == qid)
    }

    /// Per-query values of one metric, keyed by qid.
    pub fn values(&self, metric: Metric) -> BTreeMap<String, f64> {
        self.per_query
            .iter()
            .filter_map(|q| metric.of(q).map(|v| (q.qid.clone(), v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "P@10")]
    P10,
    #[serde(rename = "MRR@10")]
    Mrr10,
    #[serde(rename = "NDCG@10")]
    Ndcg10,
    #[serde(rename = "R@100")]
    R100,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::P10, Metric::Mrr10, Metric::Ndcg10, Metric::R100];

    pub fn of(self, q: &QueryMetrics) -> Option<f64> {
        match self {
            Metric::P10 => Some(q.p10),
            Metric::Mrr10 => Some(q.mrr10),
            Metric::Ndcg10 => Some(q.ndcg10),
            Metric::R100 => q.r100,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::P10 => "P@10",
            Metric::Mrr10 => "MRR@10",
            Metric::Ndcg10 => "NDCG@10",
            Metric::R100 => "R@100",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "p@10" | "p10" => Ok(Metric::P10),
            "mrr@10" | "mrr10" => Ok(Metric::Mrr10),
            "ndcg@10" | "ndcg10" => Ok(Metric::Ndcg10),
            "r@100" | "r100" => Ok(Metric::R100),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Metrics for every query in `qrels`, in qid order. A query missing from
/// the run scores 0; run queries without judgments are ignored.
pub fn evaluate(run: &Run, qrels: &Qrels) -> RunMetrics {
    let empty = Vec::new();
    let per_query: Vec<QueryMetrics> = qrels
        .relevant
        .iter()
        .map(|(qid, relevant)| {
            let ranking: Vec<String> = run
                .get(qid)
                .unwrap_or(&empty)
                .iter()
                .map(|l| l.sent_id.clone())
                .collect();
            QueryMetrics {
                qid: qid.clone(),
                p10: precision_at(&ranking, relevant, 10),
                mrr10: mrr_at(&ranking, relevant, 10),
                ndcg10: ndcg_at(&ranking, relevant, 10),
                r100: recall_at(&ranking, relevant, 100),
            }
        })
        .collect();
    let skipped = per_query.iter().filter(|q| q.r100.is_none()).count();
    if skipped > 0 {
        log::warn!("{skipped} queries without relevant sentences left out of R@100");
    }
    RunMetrics {
        mean: MeanMetrics::of(&per_query),
        per_query,
        latency: None,
    }
}

/// Reads `qid <milliseconds>` lines as written by batch search. Blank
/// lines and `#` comments are skipped.
pub fn read_latencies(reader: impl BufRead) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let ms = match f.as_slice() {
            [_, ms] => ms
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0),
            _ => None,
        };
        let ms = ms.ok_or_else(|| Error::Format {
            line: i + 1,
            message: format!("bad latency line `{line}`"),
        })?;
        out.push((f[0].to_string(), ms));
    }
    Ok(out)
}

/// Two-sided paired sign-flip permutation test.
///
/// Each iteration flips the sign of every per-query difference with
/// probability 1/2; the p-value is the fraction of iterations whose mean
/// difference is at least as extreme as the observed one.
pub fn permutation_test(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    if !a.keys().eq(b.keys()) {
        return Err(Error::Invalid("runs cover different query sets".into()));
    }
    let diffs: Vec<f64> = a.iter().map(|(q, x)| x - b[q]).collect();
    permutation_test_diffs(&diffs, iterations, seed)
}

pub fn permutation_test_diffs(diffs: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    if iterations == 0 {
        return Err(Error::Invalid(
            "permutation test needs at least one iteration".into(),
        ));
    }
    if diffs.is_empty() {
        return Ok(1.0);
    }
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..iterations {
        let s: f64 = diffs
            .iter()
            .map(|&d| if rng.gen::<bool>() { d } else { -d })
            .sum();
        if (s / n).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    Ok(extreme as f64 / iterations as f64)
}

pub const MASK: &str = "[MASK]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    Value,
    Unit,
}

impl std::str::FromStr for MaskMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "value" => Ok(MaskMode::Value),
            "unit" => Ok(MaskMode::Unit),
            other => Err(format!("unknown mask mode `{other}`")),
        }
    }
}

/// Replaces every value span (or unit surface span) with `[MASK]`. Ids and
/// order are kept; quantities are re-extracted from the masked text.
pub fn mask_corpus(sentences: &[Sentence], mode: MaskMode, extractor: &Extractor) -> Vec<Sentence> {
    sentences
        .iter()
        .map(|s| {
            let mut spans: Vec<Span> = s
                .quantities
                .iter()
                .filter_map(|q| match mode {
                    MaskMode::Value => Some(q.value_span),
                    MaskMode::Unit => q.unit_mention.as_ref().map(|m| m.span),
                })
                .collect();
            spans.sort_by_key(|sp| std::cmp::Reverse(sp.start));
            let mut text = s.text.clone();
            for sp in spans {
                text.replace_range(sp.start..sp.end, MASK);
            }
            Sentence {
                sent_id: s.sent_id.clone(),
                doc_id: s.doc_id.clone(),
                quantities: extractor.quantities(&text),
                text,
            }
        })
        .collect()
}

/// Aligned text table, one row per named run.
pub fn format_table(rows: &[(&str, &RunMetrics)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(3);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>9}  {:>9}",
        "run", "P@10", "MRR@10", "NDCG@10", "R@100", "mean_ms", "p95_ms"
    );
    for (name, m) in rows {
        let (mean, p95) = match &m.latency {
            Some(l) => (format!("{:.2}", l.mean_ms), format!("{:.2}", l.p95_ms)),
            None => ("-".to_string(), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}  {:>9}  {:>9}",
            name, m.mean.p10, m.mean.mrr10, m.mean.ndcg10, m.mean.r100, mean, p95
        );
    }
    out
}
