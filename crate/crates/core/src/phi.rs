//! Condition-dependent value proximity functions.
//!
//! Every function maps a (query value, sentence value) pair to a score in
//! `[0, 1]` and returns exactly 0 when a strict bound is violated. The
//! default set, `ratio-decay`, ranks values closer to the query value
//! higher:
//!
//! ```text
//! equal:    exp(-|vx - vi|)
//! greater:  vx / vi            if vi > vx  (both positive)
//! less:     vi / vx            if vi < vx  (both positive)
//! ```
//!
//! When a bound holds but either value is non-positive the ratio has no
//! meaning and the score falls back to `exp(-|vx - vi|)`. A satisfied bound
//! never scores 0, even when the fallback underflows.

use std::fmt;
use std::sync::Arc;

use crate::types::{decimal_to_f64, Condition, Decimal};

pub trait ProximityScorer: Send + Sync {
    fn name(&self) -> &str;
    fn equal(&self, query: Decimal, value: Decimal) -> f64;
    fn greater(&self, query: Decimal, value: Decimal) -> f64;
    fn less(&self, query: Decimal, value: Decimal) -> f64;
}

fn decay(diff: f64) -> f64 {
    (-diff.abs()).exp()
}

fn satisfied(score: f64) -> f64 {
    score.clamp(f64::MIN_POSITIVE, 1.0)
}

pub fn phi_equal(query: Decimal, value: Decimal) -> f64 {
    decay(decimal_to_f64(query - value))
}

pub fn phi_greater(query: Decimal, value: Decimal) -> f64 {
    if value <= query {
        return 0.0;
    }
    if query.is_sign_positive() && !query.is_zero() {
        satisfied(decimal_to_f64(query) / decimal_to_f64(value))
    } else {
        satisfied(decay(decimal_to_f64(query - value)))
    }
}

pub fn phi_less(query: Decimal, value: Decimal) -> f64 {
    if value >= query {
        return 0.0;
    }
    if value.is_sign_positive() && !value.is_zero() {
        satisfied(decimal_to_f64(value) / decimal_to_f64(query))
    } else {
        satisfied(decay(decimal_to_f64(query - value)))
    }
}

/// Ratio bounds with exponential decay for equality.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioDecay;

impl ProximityScorer for RatioDecay {
    fn name(&self) -> &str {
        "ratio-decay"
    }

    fn equal(&self, query: Decimal, value: Decimal) -> f64 {
        phi_equal(query, value)
    }

    fn greater(&self, query: Decimal, value: Decimal) -> f64 {
        phi_greater(query, value)
    }

    fn less(&self, query: Decimal, value: Decimal) -> f64 {
        phi_less(query, value)
    }
}

/// Like [`RatioDecay`] but equality decays with the difference relative to
/// the query magnitude, `exp(-|vx - vi| / max(|vx|, 1))`, so a gap of 3
/// matters for a price of 10 and not for one of 10 million.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeDecay;

impl ProximityScorer for RelativeDecay {
    fn name(&self) -> &str {
        "relative-decay"
    }

    fn equal(&self, query: Decimal, value: Decimal) -> f64 {
        let scale = decimal_to_f64(query).abs().max(1.0);
        decay(decimal_to_f64(query - value) / scale)
    }

    fn greater(&self, query: Decimal, value: Decimal) -> f64 {
        phi_greater(query, value)
    }

    fn less(&self, query: Decimal, value: Decimal) -> f64 {
        phi_less(query, value)
    }
}

/// A named set of three proximity functions, one per condition.
#[derive(Clone)]
pub struct PhiSet(Arc<dyn ProximityScorer>);

impl PhiSet {
    pub const DEFAULT: &'static str = "ratio-decay";
    pub const BUILTIN: [&'static str; 2] = ["ratio-decay", "relative-decay"];

    pub fn new(scorer: impl ProximityScorer + 'static) -> Self {
        PhiSet(Arc::new(scorer))
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "ratio-decay" => Some(Self::new(RatioDecay)),
            "relative-decay" => Some(Self::new(RelativeDecay)),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }

    pub fn score(&self, condition: Condition, query: Decimal, value: Decimal) -> f64 {
        match condition {
            Condition::Equal => self.0.equal(query, value),
            Condition::Greater => self.0.greater(query, value),
            Condition::Less => self.0.less(query, value),
        }
    }
}

impl Default for PhiSet {
    fn default() -> Self {
        Self::new(RatioDecay)
    }
}

impl fmt::Debug for PhiSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("PhiSet").field(&self.name()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn d(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    const EPS: f64 = 1e-12;

    #[test]
    fn equal_examples() {
        assert_eq!(phi_equal(d("100"), d("100")), 1.0);
        assert!((phi_equal(d("22"), d("17")) - (-5f64).exp()).abs() < EPS);
        assert!((phi_equal(d("22"), d("17")) - 6.737_946_999_085_467e-3).abs() < EPS);
        assert!((phi_equal(d("0.9"), d("1.4")) - 0.606_530_659_712_633_4).abs() < EPS);
    }

    #[test]
    fn greater_examples() {
        assert!((phi_greater(d("500"), d("600")) - 500.0 / 600.0).abs() < EPS);
        assert_eq!(phi_greater(d("500"), d("400")), 0.0);
        assert_eq!(phi_greater(d("500"), d("500")), 0.0);
        assert!((phi_greater(d("-5"), d("-1")) - (-4f64).exp()).abs() < EPS);
    }

    #[test]
    fn less_examples() {
        assert!((phi_less(d("200"), d("132")) - 0.66).abs() < EPS);
        assert_eq!(phi_less(d("200"), d("236.5")), 0.0);
        assert!((phi_less(d("200"), d("199.99")) - 0.99995).abs() < EPS);
        assert!(phi_less(d("200"), d("0")) > 0.0);
    }

    #[test]
    fn satisfied_bound_never_underflows_to_zero() {
        assert!(phi_less(d("5000"), d("-5000")) > 0.0);
        assert!(phi_greater(d("-5000"), d("5000")) > 0.0);
    }

    #[test]
    fn relative_variant_is_scale_free() {
        let r = RelativeDecay;
        let small = r.equal(d("10"), d("13"));
        let large = r.equal(d("10000000"), d("10000003"));
        assert!(large > small);
        assert_eq!(r.equal(d("7"), d("7")), 1.0);
    }

    #[test]
    fn registry() {
        assert_eq!(PhiSet::default().name(), PhiSet::DEFAULT);
        for name in PhiSet::BUILTIN {
            assert_eq!(PhiSet::by_name(name).unwrap().name(), name);
        }
        assert!(PhiSet::by_name("nope").is_none());
    }
}
