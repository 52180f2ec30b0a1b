//! Surface-form dictionary for numerical conditions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::is_word_char;
use crate::types::{Condition, Span};

const DEFAULT_DICTIONARY: &str = include_str!("../data/conditions.json");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseOnlySurfaces {
    #[serde(default)]
    pub equal: Vec<String>,
    #[serde(default)]
    pub greater: Vec<String>,
    #[serde(default)]
    pub less: Vec<String>,
}

/// Condition phrases. `equal`/`greater`/`less` are the phrases used both to
/// parse queries and to render generated ones; `parse_only` phrases are
/// recognised in queries but never generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDictionary {
    pub equal: Vec<String>,
    pub greater: Vec<String>,
    pub less: Vec<String>,
    #[serde(default)]
    pub parse_only: ParseOnlySurfaces,
    #[serde(skip)]
    phrases: Vec<(Vec<String>, Condition)>,
}

/// A matched condition phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionMatch {
    pub condition: Condition,
    pub span: Span,
}

impl ConditionDictionary {
    pub fn from_json(json: &str) -> Result<Self> {
        let dict: ConditionDictionary = serde_json::from_str(json).map_err(Error::json)?;
        Ok(dict.compiled())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }

    pub fn default_json() -> &'static str {
        DEFAULT_DICTIONARY
    }

    /// Phrases available for generating queries with `condition`.
    pub fn surfaces(&self, condition: Condition) -> &[String] {
        match condition {
            Condition::Equal => &self.equal,
            Condition::Greater => &self.greater,
            Condition::Less => &self.less,
        }
    }

    fn compiled(mut self) -> Self {
        let mut phrases = Vec::new();
        let groups = [
            (Condition::Equal, &self.equal, &self.parse_only.equal),
            (Condition::Greater, &self.greater, &self.parse_only.greater),
            (Condition::Less, &self.less, &self.parse_only.less),
        ];
        for (cond, main, extra) in groups {
            for p in main.iter().chain(extra.iter()) {
                let words: Vec<String> = p.split_whitespace().map(|w| w.to_lowercase()).collect();
                if !words.is_empty() {
                    phrases.push((words, cond));
                }
            }
        }
        // longest phrase first; ties keep the dictionary order
        phrases.sort_by_key(|p| std::cmp::Reverse(p.0.len()));
        self.phrases = phrases;
        self
    }

    /// Every phrase occurrence, scanning left to right and taking the
    /// longest phrase at each word position. Matches never overlap.
    pub fn find_all(&self, text: &str) -> Vec<ConditionMatch> {
        let words = words_with_spans(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let hit = self.phrases.iter().find(|(phrase, _)| {
                i + phrase.len() <= words.len()
                    && phrase.iter().zip(&words[i..]).all(|(p, (w, _))| p == w)
                    && phrase_is_contiguous(text, &words[i..i + phrase.len()])
            });
            match hit {
                Some((phrase, cond)) => {
                    let span = Span::new(words[i].1.start, words[i + phrase.len() - 1].1.end);
                    out.push(ConditionMatch {
                        condition: *cond,
                        span,
                    });
                    i += phrase.len();
                }
                None => i += 1,
            }
        }
        out
    }

    /// Picks the condition for a quantity starting at byte `anchor`: the
    /// match closest before the anchor. Without an anchor the last match in
    /// the text wins.
    pub fn detect(&self, text: &str, anchor: Option<usize>) -> Option<ConditionMatch> {
        let all = self.find_all(text);
        match anchor {
            Some(a) => all.into_iter().rfind(|m| m.span.end <= a),
            None => all.into_iter().next_back(),
        }
    }
}

impl Default for ConditionDictionary {
    fn default() -> Self {
        Self::from_json(DEFAULT_DICTIONARY).expect("bundled condition dictionary is valid")
    }
}

/// Lowercased word tokens; a word is a maximal run of word characters.
fn words_with_spans(text: &str) -> Vec<(String, Span)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((text[s..i].to_lowercase(), Span::new(s, i)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((text[s..].to_lowercase(), Span::new(s, text.len())));
    }
    out
}

/// Words of a phrase must be separated by whitespace only.
fn phrase_is_contiguous(text: &str, words: &[(String, Span)]) -> bool {
    words.windows(2).all(|w| {
        text[w[0].1.end..w[1].1.start]
            .chars()
            .all(char::is_whitespace)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> ConditionDictionary {
        ConditionDictionary::default()
    }

    #[test]
    fn seeded_table_is_verbatim() {
        let d = dict();
        assert_eq!(
            d.equal,
            [
                "exactly",
                "exact",
                "equals",
                "equals to",
                "for",
                "with",
                "of",
                "at"
            ]
        );
        assert_eq!(
            d.greater,
            [
                "greater than",
                "more than",
                "above",
                "larger than",
                "over",
                "higher than",
                "exceed",
                "exceeding"
            ]
        );
        assert_eq!(
            d.less,
            [
                "smaller than",
                "below",
                "less than",
                "fewer than",
                "no more than",
                "beneath"
            ]
        );
    }

    #[test]
    fn below_is_less() {
        assert_eq!(
            dict().detect("below", None).unwrap().condition,
            Condition::Less
        );
    }

    #[test]
    fn more_than_is_greater() {
        let text = "more than 530hp";
        let m = dict().detect(text, Some(10)).unwrap();
        assert_eq!(m.condition, Condition::Greater);
        assert_eq!(m.span.slice(text), "more than");
    }

    #[test]
    fn nearest_preceding_phrase_wins() {
        let text = "iPhone XS with price under $1500";
        let anchor = text.find('$').unwrap();
        let m = dict().detect(text, Some(anchor)).unwrap();
        assert_eq!(m.condition, Condition::Less);
        assert_eq!(dict().find_all(text).len(), 2);
    }

    #[test]
    fn longest_phrase_at_position() {
        let m = dict().find_all("no more than 5 dollars");
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].condition, Condition::Less);
    }

    #[test]
    fn phrases_respect_word_boundaries() {
        assert!(dict().find_all("car that costs").is_empty());
        assert!(dict().find_all("overall format").is_empty());
    }

    #[test]
    fn phrase_words_must_be_adjacent() {
        assert!(dict()
            .find_all("more, than")
            .iter()
            .all(|m| m.condition != Condition::Greater));
    }
}
