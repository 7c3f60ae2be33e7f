//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acceptance::{AcceptanceSpec, Criterion};
use crate::aggregation::{AggregationSpec, GroupMap};
use crate::clearing::{ClearingControl, InverseDemand};
use crate::error::{Error, Result};
use crate::network_gen::NetworkGenSpec;
use crate::riskmeasure::GridSpec;
use crate::scenarios::MarginalSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Master seed; fills every seed left unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub scenarios: ScenarioConfig,
    pub groups: GroupConfig,
    pub acceptance: AcceptanceConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub ear: EarConfig,
    pub models: Vec<ModelConfig>,
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_scenarios: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub correlation: f64,
    /// One margin for all firms, or one per group.
    pub margins: Vec<MarginalSpec>,
    /// Write `scenarios.csv` into the output directory.
    #[serde(default)]
    pub dump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedGroup {
    pub group: usize,
    pub capital: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pinned: Vec<PinnedGroup>,
}

impl GroupConfig {
    pub fn group_map(&self) -> Result<GroupMap> {
        let mut pinned = vec![None; self.sizes.len()];
        for p in &self.pinned {
            let slot = pinned
                .get_mut(p.group)
                .ok_or_else(|| Error::Config(format!("pinned group {} does not exist", p.group)))?;
            *slot = Some(p.capital);
        }
        GroupMap::with_pinned(self.sizes.clone(), pinned)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    #[serde(flatten)]
    pub criterion: Criterion,
    #[serde(default)]
    pub shift: f64,
    /// Adds this fraction of the total promised to the society to the shift
    /// (network models only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_of_promised: Option<f64>,
}

impl AcceptanceConfig {
    pub fn resolve(&self, promised: Option<f64>) -> Result<AcceptanceSpec> {
        let mut shift = self.shift;
        if let Some(frac) = self.shift_of_promised {
            let promised = promised.ok_or_else(|| {
                Error::Config("shift_of_promised needs a network model".into())
            })?;
            shift += frac * promised;
        }
        let spec = AcceptanceSpec::new(self.criterion.clone(), shift);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    #[serde(default)]
    pub nonneg: bool,
    /// Number of successive factor-2 refinements.
    #[serde(default)]
    pub refine: usize,
    #[serde(default)]
    pub allow_high_dim: bool,
}

impl GridConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            points: self.points.clone(),
            nonneg: self.nonneg,
            allow_high_dim: self.allow_high_dim,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarConfig {
    #[serde(default)]
    pub weights: Vec<Vec<f64>>,
    /// Also use `w_j = 1 / (total obligations of group j)` (network models).
    #[serde(default)]
    pub liability_scaled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<AggregationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkConfig>,
    /// Replaces the run-wide grid for this model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

impl ModelConfig {
    pub fn grid<'a>(&'a self, run: &'a RunConfig) -> &'a GridConfig {
        self.grid.as_ref().unwrap_or(&run.grid)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Every network model draws with the same seed.
    #[default]
    Shared,
    /// Model `i` draws with `seed + i`.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<NetworkGenSpecConfig>,
    /// Edge-list CSV `from,to,amount`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub inverse_demand: InverseDemand,
    /// Share `alpha` of the risk factor held liquid: `X = alpha N`,
    /// `S = (1 - alpha) N`.
    #[serde(default = "one")]
    pub liquid_fraction: f64,
    #[serde(default)]
    pub clearing: ClearingControl,
}

fn one() -> f64 {
    1.0
}

/// Generator parameters with an optional seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkGenSpecConfig {
    pub group_sizes: Vec<usize>,
    pub q: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub w_society: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seed_mode: SeedMode,
    /// Number of independent network realizations; each becomes its own
    /// model named `<name>_d<i>` with seed `seed + i`.
    #[serde(default = "one_draw", skip_serializing_if = "is_one")]
    pub draws: usize,
}

fn one_draw() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

impl NetworkGenSpecConfig {
    pub fn from_spec(spec: NetworkGenSpec) -> Self {
        Self {
            group_sizes: spec.group_sizes,
            q: spec.q,
            w: spec.w,
            w_society: spec.w_society,
            seed: Some(spec.seed),
            seed_mode: SeedMode::Shared,
            draws: 1,
        }
    }

    pub fn spec(&self) -> Result<NetworkGenSpec> {
        let seed = self
            .seed
            .ok_or_else(|| Error::Config("network seed was not resolved".into()))?;
        Ok(NetworkGenSpec {
            group_sizes: self.group_sizes.clone(),
            q: self.q.clone(),
            w: self.w.clone(),
            w_society: self.w_society.clone(),
            seed,
        })
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_scenarios: Option<usize>,
    pub grid_points: Option<usize>,
    pub refine: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub ear_weights: Option<Vec<Vec<f64>>>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative network file paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for model in &mut cfg.models {
            if let Some(net) = &mut model.network {
                if let Some(file) = &mut net.file {
                    if file.is_relative() {
                        *file = base.join(&*file);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
            self.scenarios.seed = None;
            for m in &mut self.models {
                if let Some(g) = m.network.as_mut().and_then(|n| n.generator.as_mut()) {
                    g.seed = None;
                }
            }
        }
        if let Some(n) = o.n_scenarios {
            self.scenarios.n_scenarios = n;
        }
        let grids = std::iter::once(&mut self.grid)
            .chain(self.models.iter_mut().filter_map(|m| m.grid.as_mut()));
        for grid in grids {
            if let Some(p) = o.grid_points {
                grid.points = vec![p; grid.points.len()];
            }
            if let Some(r) = o.refine {
                grid.refine = r;
            }
        }
        if let Some(out) = &o.output_dir {
            self.output_dir = Some(out.clone());
        }
        if let Some(w) = &o.ear_weights {
            self.ear.weights = w.clone();
        }
    }

    /// Fills every unset seed: from the master seed when present, otherwise
    /// from the system clock. The result has all seeds explicit.
    pub fn resolve_seeds(&mut self) {
        let master = *self.seed.get_or_insert_with(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0)
        });
        self.scenarios.seed.get_or_insert(master);
        let network_base = master.wrapping_add(0x9E37_79B9_7F4A_7C15);
        for (i, m) in self.models.iter_mut().enumerate() {
            if let Some(g) = m.network.as_mut().and_then(|n| n.generator.as_mut()) {
                let seed = match g.seed_mode {
                    SeedMode::Shared => network_base,
                    SeedMode::Independent => network_base.wrapping_add(i as u64),
                };
                g.seed.get_or_insert(seed);
            }
        }
        let mut expanded = Vec::with_capacity(self.models.len());
        for m in self.models.drain(..) {
            let draws = m
                .network
                .as_ref()
                .and_then(|n| n.generator.as_ref())
                .map_or(1, |g| g.draws);
            if draws <= 1 {
                expanded.push(m);
                continue;
            }
            for d in 0..draws {
                let mut copy = m.clone();
                copy.name = format!("{}_d{d}", m.name);
                if let Some(g) = copy.network.as_mut().and_then(|n| n.generator.as_mut()) {
                    g.seed = g.seed.map(|s| s.wrapping_add(d as u64));
                    g.draws = 1;
                }
                expanded.push(copy);
            }
        }
        self.models = expanded;
    }

    pub fn validate_schema(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("config defines no models".into()));
        }
        if self.scenarios.n_scenarios == 0 {
            return Err(Error::Config("n_scenarios must be positive".into()));
        }
        let group_map = self.groups.group_map()?;
        let dim = group_map.dim();
        let grids = std::iter::once(&self.grid).chain(self.models.iter().filter_map(|m| m.grid.as_ref()));
        for grid in grids {
            if grid.lower.len() != dim {
                return Err(Error::Config(format!(
                    "grid has {} dimensions but {dim} capital groups are free",
                    grid.lower.len()
                )));
            }
            grid.grid_spec().validate()?;
        }
        for w in &self.ear.weights {
            if w.len() != dim {
                return Err(Error::Config(format!("EAR weight vector {w:?} has wrong length")));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.models {
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate model name {}", m.name)));
            }
            if m.name.is_empty() || m.name.contains(['/', '\\']) {
                return Err(Error::Config(format!("model name {:?} is not a valid directory name", m.name)));
            }
            match (&m.aggregation, &m.network) {
                (Some(a), None) => a.validate()?,
                (None, Some(n)) => {
                    if n.generator.is_some() == n.file.is_some() {
                        return Err(Error::Config(format!(
                            "network model {} needs exactly one of generator or file",
                            m.name
                        )));
                    }
                    if !(0.0..=1.0).contains(&n.liquid_fraction) {
                        return Err(Error::Config("liquid_fraction must lie in [0,1]".into()));
                    }
                    if let Some(g) = &n.generator {
                        if g.draws == 0 {
                            return Err(Error::Config("draws must be at least 1".into()));
                        }
                        if g.group_sizes.iter().sum::<usize>() != group_map.n_firms() {
                            return Err(Error::Config("network groups and capital groups cover different firm counts".into()));
                        }
                    }
                }
                _ => {
                    return Err(Error::Config(format!(
                        "model {} needs exactly one of aggregation or network",
                        m.name
                    )))
                }
            }
        }
        if self.acceptance.shift_of_promised.is_some() && self.models.iter().any(|m| m.network.is_none()) {
            return Err(Error::Config("shift_of_promised applies to network models only".into()));
        }
        Ok(())
    }
}
