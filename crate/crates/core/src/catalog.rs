//! Unit catalog: canonical units, their families and surface forms.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::UnitPosition;

const STARTER_CATALOG: &str = include_str!("../data/units.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    #[serde(rename = "canonical")]
    pub canonical_name: String,
    pub family: String,
    #[serde(default)]
    pub prefix_surfaces: Vec<String>,
    #[serde(default)]
    pub suffix_surfaces: Vec<String>,
    /// Multiplier to the family's base unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversion_factor: Option<f64>,
}

impl Unit {
    pub fn surfaces(&self) -> impl Iterator<Item = (&str, UnitPosition)> {
        self.prefix_surfaces
            .iter()
            .map(|s| (s.as_str(), UnitPosition::Prefix))
            .chain(
                self.suffix_surfaces
                    .iter()
                    .map(|s| (s.as_str(), UnitPosition::Suffix)),
            )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoUnits,
    EmptyCanonical { index: usize },
    EmptyFamily { unit: String },
    NoSurfaces { unit: String },
    DuplicateCanonical { unit: String },
    DuplicateSurface { surface: String, units: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoUnits => write!(f, "no units defined"),
            Violation::EmptyCanonical { index } => {
                write!(f, "unit #{index} has an empty canonical name")
            }
            Violation::EmptyFamily { unit } => write!(f, "unit `{unit}` has an empty family"),
            Violation::NoSurfaces { unit } => write!(f, "unit `{unit}` has no surface forms"),
            Violation::DuplicateCanonical { unit } => {
                write!(f, "canonical name `{unit}` defined more than once")
            }
            Violation::DuplicateSurface { surface, units } => write!(
                f,
                "surface `{surface}` is shared by units {}",
                units
                    .iter()
                    .map(|u| format!("`{u}`"))
                    .collect::<Vec<_>>()
                    .join(" and ")
            ),
        }
    }
}

/// Checks catalog invariants. An empty list means the catalog is valid.
///
/// Surfaces are compared ASCII-case-insensitively, the same way they are
/// matched against text.
pub fn validate_catalog(units: &[Unit]) -> Vec<Violation> {
    let mut out = Vec::new();
    if units.is_empty() {
        out.push(Violation::NoUnits);
        return out;
    }
    let mut canon_seen = BTreeMap::new();
    let mut owners: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, u) in units.iter().enumerate() {
        if u.canonical_name.trim().is_empty() {
            out.push(Violation::EmptyCanonical { index: i });
        }
        if u.family.trim().is_empty() {
            out.push(Violation::EmptyFamily {
                unit: u.canonical_name.clone(),
            });
        }
        if u.prefix_surfaces.is_empty() && u.suffix_surfaces.is_empty() {
            out.push(Violation::NoSurfaces {
                unit: u.canonical_name.clone(),
            });
        }
        if canon_seen.insert(u.canonical_name.clone(), i).is_some() {
            out.push(Violation::DuplicateCanonical {
                unit: u.canonical_name.clone(),
            });
        }
        for (s, _) in u.surfaces() {
            let owners = owners.entry(s.to_ascii_lowercase()).or_default();
            if !owners.contains(&u.canonical_name) {
                owners.push(u.canonical_name.clone());
            }
        }
    }
    for (surface, units) in owners {
        if units.len() > 1 {
            out.push(Violation::DuplicateSurface { surface, units });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub(crate) struct Surface {
    pub text: String,
    pub unit: usize,
    pub position: UnitPosition,
}

/// A validated catalog with surface lookup tables.
#[derive(Debug, Clone)]
pub struct UnitCatalog {
    units: Vec<Unit>,
    by_name: BTreeMap<String, usize>,
    /// Longest first, so the first hit is the longest match.
    prefixes: Vec<Surface>,
    suffixes: Vec<Surface>,
}

impl UnitCatalog {
    pub fn new(units: Vec<Unit>) -> Result<Self> {
        let violations = validate_catalog(&units);
        if !violations.is_empty() {
            return Err(Error::InvalidCatalog(violations));
        }
        let by_name = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.canonical_name.clone(), i))
            .collect();
        let mut prefixes = Vec::new();
        let mut suffixes = Vec::new();
        for (i, u) in units.iter().enumerate() {
            for (s, pos) in u.surfaces() {
                let surface = Surface {
                    text: s.to_string(),
                    unit: i,
                    position: pos,
                };
                match pos {
                    UnitPosition::Prefix => prefixes.push(surface),
                    UnitPosition::Suffix => suffixes.push(surface),
                }
            }
        }
        let order =
            |a: &Surface, b: &Surface| b.text.len().cmp(&a.text.len()).then(a.text.cmp(&b.text));
        prefixes.sort_by(order);
        suffixes.sort_by(order);
        Ok(UnitCatalog {
            units,
            by_name,
            prefixes,
            suffixes,
        })
    }

    /// Parses a JSON list of unit objects without validating it.
    pub fn parse_units(json: &str) -> Result<Vec<Unit>> {
        serde_json::from_str(json).map_err(Error::json)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::new(Self::parse_units(json)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }

    /// Currency, length, mass, speed, data size, percentage, time and a few more.
    pub fn starter() -> Self {
        Self::from_json(STARTER_CATALOG).expect("bundled catalog is valid")
    }

    pub fn starter_json() -> &'static str {
        STARTER_CATALOG
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn get(&self, canonical: &str) -> Option<&Unit> {
        self.by_name.get(canonical).map(|&i| &self.units[i])
    }

    pub fn contains(&self, canonical: &str) -> bool {
        self.by_name.contains_key(canonical)
    }

    /// Other units of the same family, in catalog order.
    pub fn family_members(&self, canonical: &str) -> Vec<&Unit> {
        match self.get(canonical) {
            Some(u) => self
                .units
                .iter()
                .filter(|o| o.family == u.family && o.canonical_name != u.canonical_name)
                .collect(),
            None => Vec::new(),
        }
    }

    pub(crate) fn unit_at(&self, i: usize) -> &Unit {
        &self.units[i]
    }

    pub(crate) fn prefix_surfaces(&self) -> &[Surface] {
        &self.prefixes
    }

    pub(crate) fn suffix_surfaces(&self) -> &[Surface] {
        &self.suffixes
    }
}
