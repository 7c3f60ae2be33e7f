//! Configuration-driven runs.
//!
//! [`prepare`] builds scenarios and value models from a [`RunConfig`];
//! [`execute`] runs the grid search for every model and writes the
//! artifacts:
//!
//! ```text
//! <out>/config.resolved.toml   config with every seed explicit
//! <out>/manifest.json          version, config hash, seeds, timings
//! <out>/scenarios.csv          firm_id,scenario_id,value (optional)
//! <out>/<model>/labels.csv     k_1..k_l,label
//! <out>/<model>/inner_frontier.csv, outer_frontier.csv, inner_hull.csv
//! <out>/<model>/ear.json
//! <out>/<model>/network.csv    from,to,amount (network models)
//! ```

mod config;
mod output;
mod presets;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::*;
pub use output::{write_json, write_labels, write_points};
pub use presets::{agg_lognormal, preset, preset_names, three_tier, two_tier};

use crate::acceptance::AcceptanceSpec;
use crate::aggregation::{make_cvm, AggregationModel, GroupMap, ValueModel};
use crate::clearing::{make_network_cvm, LiabilityNetwork, NetworkModel};
use crate::error::{Error, Result};
use crate::network_gen::sample_network;
use crate::riskmeasure::{
    ear, grid_search, refine, Degeneracy, EarResult, GridApproximation, ModelOracle,
    SandwichCertificate,
};
use crate::scenarios::{expand_margins, generate, CopulaSpec, ScenarioMatrix, RNG_ALGORITHM};

pub const TOOL_NAME: &str = "sysrisk";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A value model built from a config entry.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Aggregation(AggregationModel),
    Network(NetworkModel),
}

impl BuiltModel {
    pub fn as_value_model(&self) -> &dyn ValueModel {
        match self {
            BuiltModel::Aggregation(m) => m,
            BuiltModel::Network(m) => m,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub name: String,
    pub grid: GridConfig,
    pub model: BuiltModel,
    pub acceptance: AcceptanceSpec,
    pub network: Option<Arc<LiabilityNetwork>>,
    /// `1 / (total obligations of group j)` over free groups.
    pub liability_weights: Option<Vec<f64>>,
}

/// Resolved config with its scenarios and models.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub config_text: String,
    pub config_hash: String,
    pub groups: GroupMap,
    pub scenarios: ScenarioMatrix,
    pub models: Vec<PreparedModel>,
}

/// Sizes the global worker pool; `0` keeps the default (one per core).
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size worker pool: {e}")))
}

/// Hex SHA-256 of the resolved config text.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Fills unset seeds, validates the schema and serializes the result.
pub fn resolve(mut config: RunConfig) -> Result<(RunConfig, String)> {
    config.resolve_seeds();
    config.validate_schema()?;
    let text = config.to_toml_string()?;
    Ok((config, text))
}

/// Scenario matrix shared by all models of a run.
pub fn generate_scenarios(config: &RunConfig, groups: &GroupMap) -> Result<ScenarioMatrix> {
    let copula = CopulaSpec {
        n_firms: groups.n_firms(),
        pairwise_correlation: config.scenarios.correlation,
        n_scenarios: config.scenarios.n_scenarios,
        seed: config
            .scenarios
            .seed
            .ok_or_else(|| Error::Config("scenario seed was not resolved".into()))?,
    };
    let margins = expand_margins(groups.sizes(), &config.scenarios.margins)?;
    generate(&copula, &margins)
}

fn build_network(cfg: &NetworkConfig, groups: &GroupMap) -> Result<LiabilityNetwork> {
    if let Some(g) = &cfg.generator {
        return sample_network(&g.spec()?);
    }
    let path = cfg
        .file
        .as_ref()
        .ok_or_else(|| Error::Config("network needs a generator or a file".into()))?;
    let file = std::fs::File::open(path)?;
    LiabilityNetwork::from_edge_csv(file, Some(groups.n_firms()))?.with_groups(groups.sizes().to_vec())
}

fn liability_weights(network: &LiabilityNetwork, groups: &GroupMap) -> Result<Vec<f64>> {
    let mut totals = vec![0.0; groups.n_groups()];
    for (i, g) in groups.firm_groups().into_iter().enumerate() {
        totals[g] += network.pbar()[i + 1];
    }
    let mut out = Vec::new();
    for (g, total) in totals.into_iter().enumerate() {
        if groups.pinned()[g].is_some() {
            continue;
        }
        if total <= 0.0 {
            return Err(Error::Config(format!(
                "group {g} owes nothing; liability-scaled weights are undefined"
            )));
        }
        out.push(1.0 / total);
    }
    Ok(out)
}

fn build_model(
    cfg: &ModelConfig,
    config: &RunConfig,
    groups: &GroupMap,
    scenarios: &ScenarioMatrix,
) -> Result<PreparedModel> {
    if let Some(spec) = &cfg.aggregation {
        return Ok(PreparedModel {
            name: cfg.name.clone(),
            grid: cfg.grid(config).clone(),
            model: BuiltModel::Aggregation(make_cvm(scenarios.clone(), *spec, groups.clone())?),
            acceptance: config.acceptance.resolve(None)?,
            network: None,
            liability_weights: None,
        });
    }
    let net_cfg = cfg
        .network
        .as_ref()
        .ok_or_else(|| Error::Config(format!("model {} has no kind", cfg.name)))?;
    let network = Arc::new(build_network(net_cfg, groups)?);
    let alpha = net_cfg.liquid_fraction;
    let liquid = scenarios.scaled(alpha)?;
    let illiquid = if alpha < 1.0 {
        Some(scenarios.scaled(1.0 - alpha)?)
    } else {
        None
    };
    let model = make_network_cvm(
        network.clone(),
        liquid,
        illiquid,
        net_cfg.inverse_demand.clone(),
        groups.clone(),
        net_cfg.clearing,
    )?;
    let weights = if config.ear.liability_scaled {
        Some(liability_weights(&network, groups)?)
    } else {
        None
    };
    Ok(PreparedModel {
        name: cfg.name.clone(),
        grid: cfg.grid(config).clone(),
        model: BuiltModel::Network(model),
        acceptance: config.acceptance.resolve(Some(network.promised_to_society()))?,
        network: Some(network),
        liability_weights: weights,
    })
}

/// Resolves the config and builds scenarios and models.
pub fn prepare(config: RunConfig) -> Result<Prepared> {
    let (config, config_text) = resolve(config)?;
    let groups = config.groups.group_map()?;
    let scenarios = generate_scenarios(&config, &groups)?;
    let models = config
        .models
        .iter()
        .map(|m| build_model(m, &config, &groups, &scenarios))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        config_hash: config_hash(&config_text),
        config,
        config_text,
        groups,
        scenarios,
        models,
    })
}

/// Grid search plus the configured refinements for one model.
pub fn approximate(model: &PreparedModel) -> Result<GridApproximation> {
    let oracle = ModelOracle::new(model.model.as_value_model(), &model.acceptance);
    let mut approx = grid_search(&oracle, &model.grid.grid_spec())?;
    for _ in 0..model.grid.refine {
        let calls = approx.oracle_calls;
        approx = refine(&oracle, &approx, 2)?;
        approx.oracle_calls += calls;
    }
    Ok(approx)
}

#[derive(Debug, Clone, Serialize)]
pub struct Seeds {
    pub master: Option<u64>,
    pub scenarios: Option<u64>,
    pub networks: Vec<(String, u64)>,
}

impl Seeds {
    fn of(config: &RunConfig) -> Self {
        Seeds {
            master: config.seed,
            scenarios: config.scenarios.seed,
            networks: config
                .models
                .iter()
                .filter_map(|m| {
                    let g = m.network.as_ref()?.generator.as_ref()?;
                    Some((m.name.clone(), g.seed?))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    pub name: String,
    pub description: String,
    pub acceptance: AcceptanceSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub promised_to_society: Option<f64>,
    pub lattice_points: Vec<usize>,
    pub oracle_calls: usize,
    pub inner_points: usize,
    pub outer_points: usize,
    pub monotonicity_violations: usize,
    pub degenerate: Option<Degeneracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guidance: Option<String>,
    pub certificate: SandwichCertificate,
    pub ears: Vec<EarResult>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_file: &'static str,
    pub config_hash: String,
    pub seeds: Seeds,
    pub rng: &'static str,
    pub threads: usize,
    pub started_unix_seconds: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
    pub oracle_calls: usize,
    pub models: Vec<ModelRecord>,
}

/// Outcome of [`execute`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

impl RunSummary {
    /// The degenerate-box error, if any model's box was degenerate.
    pub fn degenerate_error(&self) -> Option<Error> {
        let msgs: Vec<String> = self
            .manifest
            .models
            .iter()
            .filter_map(|m| m.guidance.as_ref().map(|g| format!("{}: {g}", m.name)))
            .collect();
        (!msgs.is_empty()).then(|| Error::DegenerateBox(msgs.join("; ")))
    }
}

fn guidance(d: Degeneracy) -> String {
    match d {
        Degeneracy::AllAcceptable => {
            "every lattice point is acceptable; lower the grid's lower corner".into()
        }
        Degeneracy::NoneAcceptable => {
            "no lattice point is acceptable; raise the grid's upper corner".into()
        }
    }
}

fn eval_ears(model: &PreparedModel, config: &RunConfig, approx: &GridApproximation) -> Result<Vec<EarResult>> {
    if approx.degenerate.is_some() {
        return Ok(Vec::new());
    }
    let mut weights = config.ear.weights.clone();
    if let Some(w) = &model.liability_weights {
        weights.push(w.clone());
    }
    weights.iter().map(|w| ear(approx, w)).collect()
}

fn write_model(dir: &Path, model: &PreparedModel, approx: &GridApproximation, ears: &[EarResult]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let dim = approx.dim();
    write_labels(&dir.join("labels.csv"), approx)?;
    write_points(&dir.join("inner_frontier.csv"), dim, &approx.inner_frontier)?;
    write_points(&dir.join("outer_frontier.csv"), dim, &approx.outer_frontier)?;
    if let Some(hull) = approx.inner_hull_2d() {
        write_points(&dir.join("inner_hull.csv"), dim, &hull)?;
    }
    write_json(&dir.join("ear.json"), ears)?;
    if let Some(net) = &model.network {
        let file = std::fs::File::create(dir.join("network.csv"))?;
        net.write_edge_csv(std::io::BufWriter::new(file))?;
    }
    Ok(())
}

/// Runs every model of `config`, writing artifacts under `out_dir` (or the
/// config's `output_dir`, or `./out`). The manifest is written before any
/// heavy work and rewritten after each model.
pub fn execute(config: RunConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    let clock = Instant::now();
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let (config, text) = resolve(config)?;
    let out = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.resolved.toml"), &text)?;
    let mut manifest = Manifest {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        config_file: "config.resolved.toml",
        config_hash: config_hash(&text),
        seeds: Seeds::of(&config),
        rng: RNG_ALGORITHM,
        threads: rayon::current_num_threads(),
        started_unix_seconds: started,
        status: "running".into(),
        error: None,
        wall_clock_seconds: 0.0,
        oracle_calls: 0,
        models: Vec::new(),
    };
    let manifest_path = out.join("manifest.json");
    write_json(&manifest_path, &manifest)?;

    let result = run_models(config, &out, &mut manifest, &manifest_path, clock);
    manifest.wall_clock_seconds = clock.elapsed().as_secs_f64();
    match result {
        Ok(()) => {
            let degenerate = manifest.models.iter().any(|m| m.degenerate.is_some());
            manifest.status = if degenerate { "degenerate" } else { "complete" }.into();
            write_json(&manifest_path, &manifest)?;
            Ok(RunSummary {
                output_dir: out,
                manifest,
            })
        }
        Err(e) => {
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
            write_json(&manifest_path, &manifest)?;
            Err(e)
        }
    }
}

fn run_models(
    config: RunConfig,
    out: &Path,
    manifest: &mut Manifest,
    manifest_path: &Path,
    clock: Instant,
) -> Result<()> {
    let prepared = prepare(config)?;
    if prepared.config.scenarios.dump {
        let file = std::fs::File::create(out.join("scenarios.csv"))?;
        prepared.scenarios.write_csv(std::io::BufWriter::new(file))?;
    }
    for model in &prepared.models {
        let t0 = Instant::now();
        let approx = approximate(model)?;
        let ears = eval_ears(model, &prepared.config, &approx)?;
        write_model(&out.join(&model.name), model, &approx, &ears)?;
        manifest.oracle_calls += approx.oracle_calls;
        manifest.models.push(ModelRecord {
            name: model.name.clone(),
            description: model.model.as_value_model().describe(),
            acceptance: model.acceptance.clone(),
            promised_to_society: model.network.as_ref().map(|n| n.promised_to_society()),
            lattice_points: approx.points().to_vec(),
            oracle_calls: approx.oracle_calls,
            inner_points: approx.inner_frontier.len(),
            outer_points: approx.outer_frontier.len(),
            monotonicity_violations: approx.monotonicity_violations,
            degenerate: approx.degenerate,
            guidance: approx.degenerate.map(guidance),
            certificate: approx.certify(),
            ears,
            runtime_seconds: t0.elapsed().as_secs_f64(),
        });
        manifest.wall_clock_seconds = clock.elapsed().as_secs_f64();
        write_json(manifest_path, manifest)?;
    }
    Ok(())
}

/// Outcome of [`validate`]: one line per check.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub lines: Vec<String>,
}

/// Checks the schema, builds scenarios and every model (which validates
/// network shapes and the inverse demand function) and probes the grid's
/// corners.
pub fn validate(config: RunConfig) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let prepared = prepare(config)?;
    report.lines.push(format!(
        "schema ok: {} models, {} firms, {} scenarios, config hash {}",
        prepared.models.len(),
        prepared.scenarios.n_firms(),
        prepared.scenarios.n_scenarios(),
        &prepared.config_hash[..16]
    ));
    for model in &prepared.models {
        let grid = model.grid.grid_spec();
        let vm = model.model.as_value_model();
        report.lines.push(format!("model {}: {} ok", model.name, vm.describe()));
        if let Some(net) = &model.network {
            report.lines.push(format!(
                "model {}: {} firm edges, promised to society {}",
                model.name,
                net.firm_edge_count(),
                net.promised_to_society()
            ));
        }
        let lower = grid.effective_lower();
        let upper = grid.upper.clone();
        let lo_ok = crate::riskmeasure::membership(vm, &model.acceptance, &lower)?;
        let hi_ok = crate::riskmeasure::membership(vm, &model.acceptance, &upper)?;
        let verdict = match (lo_ok, hi_ok) {
            (false, true) => "box straddles the boundary".to_string(),
            (true, _) => format!("warning: lower corner acceptable; {}", guidance(Degeneracy::AllAcceptable)),
            (false, false) => format!("warning: upper corner unacceptable; {}", guidance(Degeneracy::NoneAcceptable)),
        };
        report.lines.push(format!("model {}: {verdict}", model.name));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_agg() -> RunConfig {
        let mut cfg = agg_lognormal().unwrap();
        cfg.seed = Some(7);
        cfg.scenarios.n_scenarios = 400;
        cfg.grid.points = vec![9, 9];
        cfg.models.truncate(2);
        cfg
    }

    #[test]
    fn resolve_fills_every_seed() {
        let mut cfg = two_tier("A1").unwrap();
        cfg.seed = Some(11);
        let (cfg, _) = resolve(cfg).unwrap();
        assert_eq!(cfg.scenarios.seed, Some(11));
        let g = cfg.models[0].network.as_ref().unwrap().generator.as_ref().unwrap();
        assert!(g.seed.is_some());
    }

    #[test]
    fn multiple_draws_expand_into_models() {
        let mut cfg = two_tier("B2").unwrap();
        cfg.seed = Some(5);
        cfg.models[0].network.as_mut().unwrap().generator.as_mut().unwrap().draws = 3;
        let (cfg, _) = resolve(cfg).unwrap();
        let names: Vec<&str> = cfg.models.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["B2_d0", "B2_d1", "B2_d2"]);
        let seeds: Vec<u64> = cfg
            .models
            .iter()
            .map(|m| m.network.as_ref().unwrap().generator.as_ref().unwrap().seed.unwrap())
            .collect();
        assert_eq!(seeds[1], seeds[0] + 1);
        assert_eq!(seeds[2], seeds[0] + 2);
    }

    #[test]
    fn config_hash_is_stable() {
        let (_, a) = resolve(small_agg()).unwrap();
        let (_, b) = resolve(small_agg()).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn execute_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let summary = execute(small_agg(), Some(dir.path())).unwrap();
        assert_eq!(summary.manifest.status, "complete");
        for f in ["config.resolved.toml", "manifest.json", "sum/labels.csv", "sum/ear.json", "loss-/inner_frontier.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let labels = std::fs::read_to_string(dir.path().join("sum/labels.csv")).unwrap();
        assert!(labels.starts_with("k_1,k_2,label\n"));
        assert_eq!(labels.lines().count(), 82);
    }

    #[test]
    fn degenerate_box_is_reported() {
        let mut cfg = small_agg();
        cfg.grid.lower = vec![50.0, 50.0];
        cfg.grid.upper = vec![60.0, 60.0];
        let dir = tempfile::tempdir().unwrap();
        let summary = execute(cfg, Some(dir.path())).unwrap();
        assert_eq!(summary.manifest.status, "degenerate");
        assert_eq!(summary.degenerate_error().unwrap().exit_code(), 4);
    }

    #[test]
    fn liability_weights_invert_group_totals() {
        let mut cfg = two_tier("A1").unwrap();
        cfg.seed = Some(3);
        cfg.scenarios.n_scenarios = 10;
        let prepared = prepare(cfg).unwrap();
        let m = &prepared.models[0];
        let net = m.network.as_ref().unwrap();
        let w = m.liability_weights.as_ref().unwrap();
        let t1: f64 = net.pbar()[1..11].iter().sum();
        let t2: f64 = net.pbar()[11..].iter().sum();
        assert!((w[0] - 1.0 / t1).abs() < 1e-15);
        assert!((w[1] - 1.0 / t2).abs() < 1e-15);
        assert!((m.acceptance.shift - 0.9 * 190.0).abs() < 1e-9);
    }
}
