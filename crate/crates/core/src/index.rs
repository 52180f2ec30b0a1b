//! The searchable index: term index plus quantity index, persisted together
//! in one versioned JSON container.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Collection;
use crate::error::{Error, Result};
use crate::quantity_index::QuantityIndex;
use crate::term_index::{Bm25Params, TermIndex};

pub const FORMAT: &str = "quantir-index";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub bm25: Bm25Params,
    /// Canonical names of the catalog the collection was extracted with.
    pub units: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchIndex {
    pub config: IndexConfig,
    pub terms: TermIndex,
    pub quantities: QuantityIndex,
}

#[derive(Serialize, Deserialize)]
struct Container<T> {
    format: String,
    version: u32,
    index: T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

impl SearchIndex {
    pub fn build(collection: &Collection, config: IndexConfig) -> Result<Self> {
        let terms = TermIndex::build(collection, config.bm25)?;
        let quantities = QuantityIndex::build(collection);
        Ok(SearchIndex {
            config,
            terms,
            quantities,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let container = Container {
            format: FORMAT.to_string(),
            version: VERSION,
            index: self,
        };
        serde_json::to_writer(w, &container).map_err(Error::json)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = String::new();
        r.read_to_string(&mut buf)
            .map_err(|e| Error::Container(e.to_string()))?;
        let header: Header = serde_json::from_str(&buf)
            .map_err(|e| Error::Container(format!("missing format header: {e}")))?;
        if header.format != FORMAT {
            return Err(Error::Container(format!(
                "unknown format `{}`",
                header.format
            )));
        }
        if header.version != VERSION {
            return Err(Error::Container(format!(
                "version {} not supported (expected {VERSION})",
                header.version
            )));
        }
        let c: Container<SearchIndex> = serde_json::from_str(&buf).map_err(Error::json)?;
        Ok(c.index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusRecord;
    use crate::extractor::Extractor;

    fn small() -> SearchIndex {
        let records = vec![CorpusRecord::Document {
            doc_id: "d".into(),
            text: "The laptop costs $899.50. A phone costs 300 euros and weighs 180 grams.".into(),
        }];
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

    #[test]
    fn roundtrip() {
        let idx = small();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let back = SearchIndex::read_from(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
        assert_eq!(
            back.quantities.units().collect::<Vec<_>>(),
            ["dollar", "euro", "gram"]
        );
    }

    #[test]
    fn rejects_other_versions() {
        let idx = small();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replace("\"version\":1", "\"version\":7");
        assert!(matches!(
            SearchIndex::read_from(text.as_bytes()),
            Err(Error::Container(_))
        ));
        assert!(matches!(
            SearchIndex::read_from("{}".as_bytes()),
            Err(Error::Container(_))
        ));
    }
}
