//! Concept expansion: broader or synonymous multi-word phrases for a
//! concept, used to generate semantic queries.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub trait ConceptExpander {
    fn expand(&self, concept: &str) -> Result<Vec<String>>;
}

/// Keeps trimmed multi-word phrases that differ from the concept, in order,
/// without duplicates.
pub fn clean_expansions<I, S>(concept: &str, raw: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out: Vec<String> = Vec::new();
    for r in raw {
        let e = r.as_ref().trim().trim_end_matches('.').trim();
        if e.split_whitespace().count() < 2 || e.eq_ignore_ascii_case(concept) {
            continue;
        }
        if !out.iter().any(|o| o.eq_ignore_ascii_case(e)) {
            out.push(e.to_string());
        }
    }
    out
}

/// A fixed concept -> expansions map, read from JSON.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StaticExpansions(BTreeMap<String, Vec<String>>);

const DEFAULT_EXPANSIONS: &str = include_str!("../../data/expansions.json");

impl StaticExpansions {
    pub fn new(map: BTreeMap<String, Vec<String>>) -> Self {
        StaticExpansions(map)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map(StaticExpansions)
            .map_err(Error::json)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn starter() -> Self {
        Self::from_json(DEFAULT_EXPANSIONS).expect("bundled expansions are valid")
    }

    /// Runs `expander` over `concepts` and records every non-empty result.
    pub fn collect<'a>(
        expander: &dyn ConceptExpander,
        concepts: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in concepts {
            let e = expander.expand(c)?;
            if !e.is_empty() {
                map.insert(c.to_string(), e);
            }
        }
        Ok(StaticExpansions(map))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("string map serializes")
    }

    pub fn map(&self) -> &BTreeMap<String, Vec<String>> {
        &self.0
    }
}

impl ConceptExpander for StaticExpansions {
    fn expand(&self, concept: &str) -> Result<Vec<String>> {
        Ok(self
            .0
            .get(concept)
            .map(|v| clean_expansions(concept, v))
            .unwrap_or_default())
    }
}

/// A text completion backend.
pub trait CompletionClient {
    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Few-shot prompt expansion: the `{concept}` placeholder in the template is
/// replaced, the completion's first non-empty line is split on `,` and `;`.
pub struct PromptExpander<C> {
    template: String,
    client: C,
}

pub const PLACEHOLDER: &str = "{concept}";

impl<C: CompletionClient> PromptExpander<C> {
    pub fn new(template: impl Into<String>, client: C) -> Result<Self> {
        let template = template.into();
        if !template.contains(PLACEHOLDER) {
            return Err(Error::Expansion(format!(
                "prompt template has no {PLACEHOLDER} placeholder"
            )));
        }
        Ok(PromptExpander { template, client })
    }

    pub fn prompt(&self, concept: &str) -> String {
        self.template.replace(PLACEHOLDER, concept)
    }
}

impl<C: CompletionClient> ConceptExpander for PromptExpander<C> {
    fn expand(&self, concept: &str) -> Result<Vec<String>> {
        let reply = self.client.complete(&self.prompt(concept))?;
        let line = reply
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .unwrap_or("");
        Ok(clean_expansions(concept, line.split([',', ';'])))
    }
}

/// Replays completions recorded in a JSONL file of
/// `{"prompt": .., "completion": ..}` records. Unknown prompts complete to
/// the empty string.
#[derive(Debug, Clone, Default)]
pub struct RecordedCompletions(BTreeMap<String, String>);

#[derive(serde::Deserialize)]
struct Recorded {
    prompt: String,
    completion: String,
}

impl RecordedCompletions {
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: Recorded = serde_json::from_str(line).map_err(|e| Error::json_at(i + 1, e))?;
            map.insert(r.prompt, r.completion);
        }
        Ok(RecordedCompletions(map))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

impl CompletionClient for RecordedCompletions {
    fn complete(&self, prompt: &str) -> Result<String> {
        match self.0.get(prompt) {
            Some(c) => Ok(c.clone()),
            None => {
                log::warn!(
                    "no recorded completion for prompt ending {:?}",
                    prompt.lines().last().unwrap_or("")
                );
                Ok(String::new())
            }
        }
    }
}

pub const FINANCE_PROMPT: &str = include_str!("../../data/prompts/finance.txt");
pub const MEDICAL_PROMPT: &str = include_str!("../../data/prompts/medical.txt");
