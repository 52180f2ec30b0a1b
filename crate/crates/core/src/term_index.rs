//! Inverted term index with Okapi BM25 scoring.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Collection;
use crate::error::{Error, Result};
use crate::text::terms;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.5, b: 0.5 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::Invalid(format!(
                "k1 must be finite and >= 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Invalid(format!(
                "b must lie in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

/// Sentence positions are in sentence id order, matching
/// [`QuantityIndex`](crate::quantity_index::QuantityIndex).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermIndex {
    params: Bm25Params,
    sent_ids: Vec<String>,
    lengths: Vec<u32>,
    avg_length: f64,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

impl TermIndex {
    pub fn build(collection: &Collection, params: Bm25Params) -> Result<Self> {
        params.validate()?;
        let sentences = collection.sentences();
        let mut order: Vec<usize> = (0..sentences.len()).collect();
        order.sort_by(|&a, &b| sentences[a].sent_id.cmp(&sentences[b].sent_id));

        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut sent_ids = Vec::with_capacity(order.len());
        let mut lengths = Vec::with_capacity(order.len());
        for (pos, &i) in order.iter().enumerate() {
            let s = &sentences[i];
            if sent_ids.last() == Some(&s.sent_id) {
                return Err(Error::DuplicateId(s.sent_id.clone()));
            }
            let tokens = terms(&s.text);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for (t, n) in tf {
                postings.entry(t).or_default().push((pos as u32, n));
            }
            sent_ids.push(s.sent_id.clone());
            lengths.push(tokens.len() as u32);
        }
        for list in postings.values_mut() {
            list.sort_unstable();
        }
        let total: u64 = lengths.iter().map(|&l| u64::from(l)).sum();
        let avg_length = if lengths.is_empty() {
            0.0
        } else {
            total as f64 / lengths.len() as f64
        };
        Ok(TermIndex {
            params,
            sent_ids,
            lengths,
            avg_length,
            postings,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn len(&self) -> usize {
        self.sent_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sent_ids.is_empty()
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

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.document_frequency(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, idf: f64, tf: u32, sentence: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = if self.avg_length > 0.0 {
            1.0 - b + b * f64::from(self.lengths[sentence as usize]) / self.avg_length
        } else {
            1.0
        };
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 of one sentence. Repeated query terms count once per occurrence.
    pub fn bm25(&self, query_terms: &[String], sentence: u32) -> f64 {
        let mut score = 0.0;
        for t in query_terms {
            let Some(list) = self.postings.get(t) else {
                continue;
            };
            if let Ok(i) = list.binary_search_by_key(&sentence, |&(s, _)| s) {
                score += self.term_weight(self.idf(t), list[i].1, sentence);
            }
        }
        score
    }

    /// Raw BM25 of every sentence containing at least one query term, in
    /// sentence order.
    pub fn score_all(&self, query_terms: &[String]) -> Vec<(u32, f64)> {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for t in query_terms {
            let Some(list) = self.postings.get(t) else {
                continue;
            };
            let idf = self.idf(t);
            for &(s, tf) in list {
                *acc.entry(s).or_default() += self.term_weight(idf, tf, s);
            }
        }
        acc.into_iter().filter(|(_, v)| *v > 0.0).collect()
    }

    /// Top `k` sentences by BM25 divided by the best score, ties by id.
    pub fn top_terms_search(&self, query_terms: &[String], k: usize) -> Vec<(String, f64)> {
        let mut scored = self.score_all(query_terms);
        let max = scored.iter().map(|&(_, v)| v).fold(0.0, f64::max);
        if max <= 0.0 {
            return Vec::new();
        }
        // sentence positions are already in id order, so a stable sort keeps ties by id
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored
            .into_iter()
            .take(k)
            .map(|(s, v)| (self.sent_id(s).to_string(), v / max))
            .collect()
    }
}
