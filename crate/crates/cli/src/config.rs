use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use quantir::datagen::DatagenConfig;
use quantir::{Bm25Params, ConditionDictionary, Extractor, PhiSet, RankerConfig, UnitCatalog};
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// File configuration. Command-line flags override these values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub catalog: Option<PathBuf>,
    pub conditions: Option<PathBuf>,
    pub bm25: Bm25Params,
    pub ranker: RankerSection,
    pub datagen: DatagenConfig,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerSection {
    pub alpha: f64,
    pub depth: usize,
    pub phi: String,
    /// Score quantities in other units of the query unit's family after
    /// conversion through the catalog factors.
    pub convert_units: bool,
}

impl Default for RankerSection {
    fn default() -> Self {
        RankerSection {
            alpha: 1.0,
            depth: 1000,
            phi: PhiSet::default().name().to_string(),
            convert_units: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub permutations: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            permutations: 10_000,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn extractor(&self) -> anyhow::Result<Extractor> {
        let catalog = match &self.catalog {
            Some(p) => UnitCatalog::from_path(p)?,
            None => UnitCatalog::starter(),
        };
        let conditions = match &self.conditions {
            Some(p) => ConditionDictionary::from_path(p)?,
            None => ConditionDictionary::default(),
        };
        Ok(Extractor::new(catalog, conditions))
    }

    pub fn ranker(&self, extractor: &Extractor) -> anyhow::Result<RankerConfig> {
        let r = &self.ranker;
        if !r.alpha.is_finite() || r.alpha < 0.0 {
            bail!(UsageError(format!(
                "alpha must be a non-negative number, got {}",
                r.alpha
            )));
        }
        let Some(phi) = PhiSet::by_name(&r.phi) else {
            bail!(UsageError(format!("unknown phi variant `{}`", r.phi)));
        };
        Ok(RankerConfig {
            alpha: r.alpha,
            depth: r.depth,
            phi,
            convert_units: r.convert_units.then(|| extractor.catalog().clone()),
        })
    }
}
