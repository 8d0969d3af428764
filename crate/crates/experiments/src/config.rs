//! Run configuration: one TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [panel]
//! input = "panel.csv"
//! deflators = "deflators.csv"
//! zipmap = "zipmap.csv"
//! years = [1998, 2007]
//!
//! [fit]
//! variables = ["LP"]
//! groupings = ["year", "year-region", "pooled"]
//! models = ["levy", "aep"]
//! gates = { national_year = 10000, region_year = 5000, pooled = 1000 }
//! beta_bound = 0.95
//!
//! [synth]
//! preset = "lp-reference"
//! scale = 0.1
//!
//! [gclt]
//! component = { kind = "pareto", tail = 1.5 }
//! n_terms = [10, 100, 1000]
//! n_sums = 100000
//!
//! [vardiv]
//! params = { alpha = 1.1, beta = 0.0, gamma = 1.0, delta = 0.0 }
//! sizes = [1000, 10000, 100000, 1000000]
//! reps = 100
//! ```

use std::path::{Path, PathBuf};

use heavytail_core::{FittedModel, StableParams};
use serde::{Deserialize, Serialize};

use crate::density::GridSpec;
use crate::error::{Error, Result};
use crate::fit_table::FitConfig;
use crate::gclt::Component;
use crate::synth::{SynthCell, SynthSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub panel: PanelConfig,
    pub fit: FitConfig,
    pub synth: SynthConfig,
    pub gclt: GcltConfig,
    pub vardiv: VardivConfig,
    pub density: DensityConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            output_dir: PathBuf::from("out"),
            panel: PanelConfig::default(),
            fit: FitConfig::default(),
            synth: SynthConfig::default(),
            gclt: GcltConfig::default(),
            vardiv: VardivConfig::default(),
            density: DensityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelConfig {
    /// Raw panel CSV; defaults to the synthetic panel in the output directory.
    pub input: Option<PathBuf>,
    pub deflators: Option<PathBuf>,
    pub zipmap: Option<PathBuf>,
    pub years: Option<[i32; 2]>,
    /// Derived panel read by `fit`; defaults to the `derive` output.
    pub derived: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// `"lp-reference"` or none; explicit `cells` are appended.
    pub preset: Option<String>,
    pub scale: f64,
    pub linkage: f64,
    pub zips: Vec<String>,
    pub cells: Vec<SynthCell>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { preset: Some("lp-reference".into()), scale: 1.0, linkage: 0.7, zips: Vec::new(), cells: Vec::new() }
    }
}

impl SynthConfig {
    pub fn spec(&self) -> Result<SynthSpec> {
        let mut spec = match self.preset.as_deref() {
            Some("lp-reference") => SynthSpec::lp_reference(self.scale, self.linkage)?,
            Some(other) => return Err(Error::Config(format!("unknown synth preset '{other}'"))),
            None => SynthSpec { cells: Vec::new(), linkage: self.linkage, zips: Vec::new() },
        };
        spec.cells.extend(self.cells.iter().cloned());
        spec.zips = self.zips.clone();
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcltConfig {
    pub component: Component,
    pub n_terms: Vec<usize>,
    pub n_sums: usize,
}

impl Default for GcltConfig {
    fn default() -> Self {
        Self { component: Component::Pareto { tail: 1.5 }, n_terms: vec![10, 100, 1000], n_sums: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VardivConfig {
    pub params: StableParams,
    pub sizes: Vec<usize>,
    pub reps: usize,
}

impl Default for VardivConfig {
    fn default() -> Self {
        Self {
            params: StableParams::new(1.1, 0.0, 1.0, 0.0).expect("valid default"),
            sizes: vec![1_000, 10_000, 100_000, 1_000_000],
            reps: 100,
        }
    }
}

/// A fixed model curve for `export-density`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCurve {
    pub id: String,
    pub model: FittedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    /// Variable taken from the derived panel, one series per year.
    pub variable: Option<String>,
    /// Years to export; empty means all.
    pub years: Vec<i32>,
    /// Also fit and export a stable curve per year.
    pub fit: bool,
    pub curves: Vec<ModelCurve>,
    pub grid: GridSpec,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            variable: Some("LP".into()),
            years: Vec::new(),
            fit: true,
            curves: Vec::new(),
            grid: GridSpec { lo: -1.0, hi: 5.0, points: 601 },
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_toml(&text)
    }

    /// Loads `path` (or the defaults) and applies `key=value` overrides, where
    /// the key is a dotted path and the value a TOML literal or bare string.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(Error::io(p))?,
            None => String::new(),
        };
        let mut doc: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let (key, raw) = o.split_once('=').ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            set_path(&mut doc, key.trim(), parse_literal(raw.trim()))?;
        }
        let merged = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_toml(&merged)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::Config(format!("empty override key '{key}'")))?;
    let mut table = doc;
    for p in parts {
        let entry = table.entry(p.to_owned()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| Error::Config(format!("'{p}' in '{key}' is not a table")))?;
    }
    table.insert(last.to_owned(), value);
    Ok(())
}
