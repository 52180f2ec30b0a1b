//! Quantity-aware sentence retrieval.
//!
//! Queries such as "car that costs less than $10k" carry search terms, a
//! numerical condition and a quantity. This crate extracts quantities from
//! sentences, indexes them next to a BM25 term index, and ranks sentences by
//! the sum of normalized term relevance and condition-dependent quantity
//! proximity. It also generates contrastive training data for quantity-aware
//! fine-tuning of external rankers and evaluates runs with standard IR
//! metrics.

pub mod catalog;
pub mod conditions;
pub mod corpus;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod index;
pub mod phi;
pub mod quantity_index;
pub mod rankers;
pub mod synthetic;
pub mod term_index;
pub mod text;
pub mod trec;
pub mod types;

pub use catalog::{validate_catalog, Unit, UnitCatalog, Violation};
pub use conditions::ConditionDictionary;
pub use corpus::{Collection, CorpusRecord};
pub use error::{Error, Result};
pub use eval::{MaskMode, Metric, Qrels, RunMetrics};
pub use extractor::{Extraction, Extractor};
pub use index::{IndexConfig, SearchIndex};
pub use phi::PhiSet;
pub use quantity_index::QuantityIndex;
pub use rankers::{RankerConfig, RankerKind, RerankMode, ScoredResult};
pub use term_index::{Bm25Params, TermIndex};
pub use types::{
    sentence_id, Condition, Decimal, Quantity, QuantityConstraint, QuantityQuery, Sentence, Span,
    UnitMention, UnitPosition, DIMENSIONLESS,
};
