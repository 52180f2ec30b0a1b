//! Domain types shared by every module.
//!
//! Values are exact decimals ([`Decimal`]) so that `17.0` and `17` extracted
//! from two different sentences compare and hash equal. All types are plain
//! data and immutable once built.

use std::fmt;
use std::str::FromStr;

pub use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved unit name for quantities without a recognised unit.
pub const DIMENSIONLESS: &str = "dimensionless";

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn cover(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

/// Where a unit surface sits relative to its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitPosition {
    Prefix,
    Suffix,
}

/// The unit surface matched for one quantity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitMention {
    pub span: Span,
    pub position: UnitPosition,
}

/// A (value, canonical unit) pair located in a text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quantity {
    pub value: Decimal,
    pub unit: String,
    /// Whole mention: unit surface plus value.
    pub span: Span,
    /// The number itself, including any magnitude word ("300 million").
    pub value_span: Span,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_mention: Option<UnitMention>,
}

impl Quantity {
    /// A quantity not tied to any source text, e.g. one built by hand for a query.
    pub fn bare(value: Decimal, unit: impl Into<String>) -> Self {
        Quantity {
            value: value.normalize(),
            unit: unit.into(),
            span: Span::new(0, 0),
            value_span: Span::new(0, 0),
            unit_mention: None,
        }
    }

    pub fn is_dimensionless(&self) -> bool {
        self.unit == DIMENSIONLESS
    }

    pub fn value_f64(&self) -> f64 {
        decimal_to_f64(self.value)
    }

    /// Checks the invariants that do not depend on a catalog.
    pub fn validate_against(&self, text: &str) -> Result<()> {
        let bounds = |s: &Span| s.end <= text.len() && s.start <= s.end;
        if !bounds(&self.span) || !bounds(&self.value_span) {
            return Err(Error::Invalid(format!(
                "quantity span {:?} outside text of length {}",
                self.span,
                text.len()
            )));
        }
        if !self.span.contains(&self.value_span) {
            return Err(Error::Invalid("value span outside quantity span".into()));
        }
        Ok(())
    }
}

pub fn decimal_to_f64(d: Decimal) -> f64 {
    use rust_decimal::prelude::ToPrimitive;
    d.to_f64().expect("decimal always converts to f64")
}

/// Numerical condition of a quantity query. Bounds are strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Equal,
    Less,
    Greater,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Equal, Condition::Greater, Condition::Less];

    /// True when `value` satisfies the condition against `bound`.
    pub fn holds(self, bound: Decimal, value: Decimal) -> bool {
        match self {
            Condition::Equal => value == bound,
            Condition::Less => value < bound,
            Condition::Greater => value > bound,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Equal => "equal",
            Condition::Less => "less",
            Condition::Greater => "greater",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Condition::Equal => "=",
            Condition::Less => "<",
            Condition::Greater => ">",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equal" | "eq" | "=" => Ok(Condition::Equal),
            "less" | "lt" | "<" => Ok(Condition::Less),
            "greater" | "gt" | ">" => Ok(Condition::Greater),
            other => Err(Error::Invalid(format!("unknown condition `{other}`"))),
        }
    }
}

/// A retrieval unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub sent_id: String,
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub quantities: Vec<Quantity>,
}

impl Sentence {
    pub fn validate(&self) -> Result<()> {
        for q in &self.quantities {
            q.validate_against(&self.text)?;
        }
        for (i, a) in self.quantities.iter().enumerate() {
            for b in &self.quantities[i + 1..] {
                if a.span.overlaps(&b.span) {
                    return Err(Error::Invalid(format!(
                        "overlapping quantities in sentence `{}`",
                        self.sent_id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `<doc_id>#<zero-based sentence ordinal>`
pub fn sentence_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}#{ordinal}")
}

/// Condition plus query quantity; present together or not at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityConstraint {
    pub condition: Condition,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityQuery {
    pub qid: String,
    pub raw_text: String,
    /// Search terms: query tokens minus the condition phrase, the value and
    /// the unit surface, lowercased, stopwords dropped.
    pub terms: Vec<String>,
    /// Every non-stopword token of the raw text, as a quantity-unaware
    /// lexical engine would see it.
    pub lexical_terms: Vec<String>,
    pub constraint: Option<QuantityConstraint>,
}

impl QuantityQuery {
    pub fn term_only(
        qid: impl Into<String>,
        raw_text: impl Into<String>,
        terms: Vec<String>,
    ) -> Self {
        QuantityQuery {
            qid: qid.into(),
            raw_text: raw_text.into(),
            lexical_terms: terms.clone(),
            terms,
            constraint: None,
        }
    }

    pub fn condition(&self) -> Option<Condition> {
        self.constraint.as_ref().map(|c| c.condition)
    }

    pub fn quantity(&self) -> Option<&Quantity> {
        self.constraint.as_ref().map(|c| &c.quantity)
    }

    pub fn is_quantity_centric(&self) -> bool {
        self.constraint.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    #[test]
    fn equal_decimals_compare_equal() {
        assert_eq!(d("17.0"), d("17"));
        assert_eq!(d("17.0").normalize().to_string(), "17");
    }

    #[test]
    fn strict_bounds() {
        assert!(!Condition::Less.holds(d("5"), d("5")));
        assert!(!Condition::Greater.holds(d("5"), d("5")));
        assert!(Condition::Equal.holds(d("5.00"), d("5")));
        assert!(Condition::Greater.holds(d("-5"), d("-1")));
    }

    #[test]
    fn sentence_ids() {
        assert_eq!(sentence_id("doc7", 0), "doc7#0");
    }

    #[test]
    fn condition_parse() {
        assert_eq!("GT".parse::<Condition>().unwrap(), Condition::Greater);
        assert!("between".parse::<Condition>().is_err());
    }

    #[test]
    fn overlapping_quantities_rejected() {
        let q = |a, b| Quantity {
            value: d("1"),
            unit: DIMENSIONLESS.into(),
            span: Span::new(a, b),
            value_span: Span::new(a, b),
            unit_mention: None,
        };
        let s = Sentence {
            sent_id: "d#0".into(),
            doc_id: "d".into(),
            text: "1234567".into(),
            quantities: vec![q(0, 3), q(2, 4)],
        };
        assert!(s.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quantity_json_roundtrip_is_exact(mantissa in any::<i64>(), scale in 0u32..12) {
                let q = Quantity::bare(Decimal::new(mantissa, scale), "euro");
                let json = serde_json::to_string(&q).unwrap();
                let back: Quantity = serde_json::from_str(&json).unwrap();
                prop_assert_eq!(back.value, q.value);
                prop_assert_eq!(back.value.to_string(), q.value.to_string());
                prop_assert_eq!(back, q);
            }
        }
    }
}
