//! Sentence collections and corpus ingestion.
//!
//! Corpus files are JSONL. Each line is either a document,
//! `{"doc_id": .., "text": ..}`, which is split into sentences, or a
//! pre-split sentence, `{"sent_id": .., "text": .., "doc_id": ..}` with
//! `doc_id` optional.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractor::Extractor;
use crate::types::{sentence_id, Sentence};

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "approx.", "no.", "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
    "inc.", "ltd.", "co.", "corp.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.",
];

fn ends_with_abbreviation(text: &str) -> bool {
    let word_start = text
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || *c == '(')
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = text[word_start..].to_ascii_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits running text into trimmed sentences.
///
/// A boundary is a `.`, `!` or `?` (optionally followed by closing quotes or
/// brackets) that is followed by whitespace and then an uppercase letter, a
/// digit or an opening quote. Known abbreviations never end a sentence.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && matches!(chars[j].1, '"' | '\'' | ')' | ']' | '”' | '’') {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |(p, _)| *p);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k > j
            && k < chars.len()
            && {
                let next = chars[k].1;
                next.is_uppercase() || next.is_ascii_digit() || matches!(next, '"' | '“' | '(')
            }
            && !(c == '.' && ends_with_abbreviation(&text[start..pos + 1]));
        if boundary {
            let s = text[start..end].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = chars[k].0;
            i = k;
        } else {
            i = j.max(i + 1);
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusRecord {
    Sentence {
        sent_id: String,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        doc_id: Option<String>,
    },
    Document {
        doc_id: String,
        text: String,
    },
}

pub fn read_corpus(reader: impl BufRead) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Format {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::json_at(n + 1, e))?);
    }
    Ok(out)
}

/// An ordered set of sentences with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Collection {
    sentences: Vec<Sentence>,
    by_id: HashMap<String, usize>,
}

impl Collection {
    pub fn new(sentences: Vec<Sentence>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            if by_id.insert(s.sent_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(s.sent_id.clone()));
            }
        }
        Ok(Collection { sentences, by_id })
    }

    /// Splits documents, extracts quantities and assigns sentence ids.
    pub fn ingest(records: Vec<CorpusRecord>, extractor: &Extractor) -> Result<Self> {
        let mut sentences = Vec::new();
        for record in records {
            match record {
                CorpusRecord::Document { doc_id, text } => {
                    for (i, s) in split_sentences(&text).into_iter().enumerate() {
                        sentences.push(Sentence {
                            sent_id: sentence_id(&doc_id, i),
                            doc_id: doc_id.clone(),
                            text: s.to_string(),
                            quantities: extractor.quantities(s),
                        });
                    }
                }
                CorpusRecord::Sentence {
                    sent_id,
                    text,
                    doc_id,
                } => {
                    let quantities = extractor.quantities(&text);
                    sentences.push(Sentence {
                        doc_id: doc_id.unwrap_or_else(|| sent_id.clone()),
                        sent_id,
                        text,
                        quantities,
                    });
                }
            }
        }
        Self::new(sentences)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn get(&self, sent_id: &str) -> Option<&Sentence> {
        self.by_id.get(sent_id).map(|&i| &self.sentences[i])
    }

    pub fn position(&self, sent_id: &str) -> Option<usize> {
        self.by_id.get(sent_id).copied()
    }

    pub fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminal_punctuation() {
        let s = split_sentences("Prices rose. The iPhone costs $999! Is it worth it? Yes.");
        assert_eq!(
            s,
            [
                "Prices rose.",
                "The iPhone costs $999!",
                "Is it worth it?",
                "Yes."
            ]
        );
    }

    #[test]
    fn keeps_decimals_and_abbreviations() {
        let s = split_sentences("Dr. Smith paid $3.50 on Jan. 5 for it, e.g. A coffee. Next one.");
        assert_eq!(
            s,
            [
                "Dr. Smith paid $3.50 on Jan. 5 for it, e.g. A coffee.",
                "Next one."
            ]
        );
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(
            split_sentences("It was approx. ten. and more"),
            ["It was approx. ten. and more"]
        );
    }

    #[test]
    fn ingest_assigns_ids() {
        let records = read_corpus(
            "{\"doc_id\":\"d1\",\"text\":\"A costs $5. B costs $7.\"}\n\n{\"sent_id\":\"x\",\"text\":\"C costs 9 euros\"}\n"
                .as_bytes(),
        )
        .unwrap();
        let c = Collection::ingest(records, &Extractor::starter()).unwrap();
        let ids: Vec<&str> = c.sentences().iter().map(|s| s.sent_id.as_str()).collect();
        assert_eq!(ids, ["d1#0", "d1#1", "x"]);
        assert_eq!(c.get("x").unwrap().quantities[0].unit, "euro");
        assert_eq!(c.get("d1#1").unwrap().doc_id, "d1");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let records = vec![
            CorpusRecord::Sentence {
                sent_id: "a".into(),
                text: "x".into(),
                doc_id: None,
            },
            CorpusRecord::Sentence {
                sent_id: "a".into(),
                text: "y".into(),
                doc_id: None,
            },
        ];
        assert!(matches!(
            Collection::ingest(records, &Extractor::starter()),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
    }

    #[test]
    fn bad_line_reports_line_number() {
        let err =
            read_corpus("{\"doc_id\":\"d\",\"text\":\"ok\"}\nnot json\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }
}
