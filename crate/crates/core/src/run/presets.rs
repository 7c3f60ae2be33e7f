//! Built-in configurations for the case studies.

use crate::acceptance::{Criterion, Utility};
use crate::aggregation::{AggregationKind, AggregationSpec, CapitalMode};
use crate::clearing::{ClearingControl, InverseDemand};
use crate::error::{Error, Result};
use crate::network_gen::{three_tier_preset, two_tier_preset, TWO_TIER_SCENARIOS};
use crate::scenarios::{norm_inv, MarginalSpec};

use super::config::*;

/// Names accepted by [`preset`].
pub fn preset_names() -> Vec<String> {
    let mut names = vec!["agg_lognormal".to_string()];
    names.extend(TWO_TIER_SCENARIOS.iter().map(|(id, _)| format!("two_tier:{id}")));
    names.push("three_tier:<alpha>".into());
    names
}

/// Looks up a preset: `agg_lognormal`, `two_tier:<A1..C6>` or
/// `three_tier:<alpha>` with `alpha` in `[0,1]`.
pub fn preset(name: &str) -> Result<RunConfig> {
    let (head, arg) = match name.split_once([':', '=']) {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, arg) {
        ("agg_lognormal", None) => agg_lognormal(),
        ("two_tier", Some(id)) => two_tier(id),
        ("three_tier", arg) => {
            let alpha = match arg {
                Some(a) => a
                    .trim_start_matches("alpha=")
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad alpha in preset {name}")))?,
                None => 0.6,
            };
            three_tier(alpha)
        }
        _ => Err(Error::Config(format!(
            "unknown preset {name}; known: {}",
            preset_names().join(", ")
        ))),
    }
}

/// Two symmetric groups of 50 firms with shifted lognormal positions and
/// five aggregation models.
pub fn agg_lognormal() -> Result<RunConfig> {
    let mu = norm_inv(0.75)?;
    let models = [
        ("sum", AggregationKind::Sum, CapitalMode::Insensitive),
        ("loss-", AggregationKind::Loss, CapitalMode::Insensitive),
        ("loss+", AggregationKind::Loss, CapitalMode::Sensitive),
        ("exp-", AggregationKind::Exp, CapitalMode::Insensitive),
        ("exp+", AggregationKind::Exp, CapitalMode::Sensitive),
    ]
    .into_iter()
    .map(|(name, kind, mode)| ModelConfig {
        name: name.into(),
        aggregation: Some(AggregationSpec::new(kind, mode)),
        network: None,
        grid: (name == "exp-").then(|| GridConfig {
            lower: vec![0.0, 0.0],
            upper: vec![16.0, 16.0],
            points: vec![50, 50],
            nonneg: false,
            refine: 0,
            allow_high_dim: false,
        }),
    })
    .collect();
    Ok(RunConfig {
        name: "agg_lognormal".into(),
        seed: None,
        output_dir: None,
        scenarios: ScenarioConfig {
            n_scenarios: 10_000,
            seed: None,
            correlation: 0.8,
            margins: vec![MarginalSpec::ShiftedLognormal { mu, sigma: 1.0, b: -1.0 }],
            dump: false,
        },
        groups: GroupConfig { sizes: vec![50, 50], pinned: vec![] },
        acceptance: AcceptanceConfig {
            criterion: Criterion::Oce { utility: Utility::Log1p },
            shift: -10.0,
            shift_of_promised: None,
        },
        grid: GridConfig {
            lower: vec![0.0, 0.0],
            upper: vec![2.0, 2.0],
            points: vec![50, 50],
            nonneg: false,
            refine: 0,
            allow_high_dim: false,
        },
        ear: EarConfig { weights: vec![vec![1.0, 1.0]], liability_scaled: false },
        models,
    })
}

fn beta25(scale: f64, shift: f64) -> MarginalSpec {
    MarginalSpec::ScaledBeta { scale, shift, alpha: 2.0, beta: 5.0 }
}

/// Ten large and ninety small firms clearing without fire sales.
pub fn two_tier(id: &str) -> Result<RunConfig> {
    let gen = two_tier_preset(id, 0)?;
    let id = id.to_ascii_uppercase();
    let mut generator = NetworkGenSpecConfig::from_spec(gen);
    generator.seed = None;
    Ok(RunConfig {
        name: format!("two_tier_{id}"),
        seed: None,
        output_dir: None,
        scenarios: ScenarioConfig {
            n_scenarios: 1_000,
            seed: None,
            correlation: 0.5,
            margins: vec![beta25(1.0, 0.0)],
            dump: false,
        },
        groups: GroupConfig { sizes: vec![10, 90], pinned: vec![] },
        acceptance: AcceptanceConfig {
            criterion: Criterion::Avar { lambda: 0.01 },
            shift: 0.0,
            shift_of_promised: Some(0.9),
        },
        grid: GridConfig {
            lower: vec![0.0, 0.0],
            upper: vec![60.0, 12.0],
            points: vec![40, 40],
            nonneg: true,
            refine: 0,
            allow_high_dim: false,
        },
        ear: EarConfig {
            weights: vec![vec![1.0, 1.0], vec![10.0, 90.0]],
            liability_scaled: true,
        },
        models: vec![ModelConfig {
            name: id,
            aggregation: None,
            network: Some(NetworkConfig {
                generator: Some(generator),
                file: None,
                inverse_demand: InverseDemand::Constant { price: 1.0 },
                liquid_fraction: 1.0,
                clearing: ClearingControl::default(),
            }),
            grid: None,
        }],
    })
}

/// Large, medium and small firms with fire sales; small-firm capital is
/// held at zero.
pub fn three_tier(alpha: f64) -> Result<RunConfig> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let mut generator = NetworkGenSpecConfig::from_spec(three_tier_preset(0));
    generator.seed = None;
    Ok(RunConfig {
        name: format!("three_tier_{alpha}"),
        seed: None,
        output_dir: None,
        scenarios: ScenarioConfig {
            n_scenarios: 500,
            seed: None,
            correlation: 0.5,
            margins: vec![
                beta25(350.0 / 500.0, 100.0 / 500.0),
                beta25(70.0 / 500.0, 20.0 / 500.0),
                beta25(1.75 / 500.0, 0.5 / 500.0),
            ],
            dump: false,
        },
        groups: GroupConfig {
            sizes: vec![10, 90, 200],
            pinned: vec![PinnedGroup { group: 2, capital: 0.0 }],
        },
        acceptance: AcceptanceConfig {
            criterion: Criterion::Entropic { level: 0.9 },
            shift: 0.0,
            shift_of_promised: None,
        },
        grid: GridConfig {
            lower: vec![0.0, 0.0],
            upper: vec![1.2, 0.4],
            points: vec![30, 30],
            nonneg: true,
            refine: 0,
            allow_high_dim: false,
        },
        ear: EarConfig { weights: vec![vec![1.0, 1.0]], liability_scaled: false },
        models: vec![ModelConfig {
            name: format!("alpha_{alpha}"),
            aggregation: None,
            network: Some(NetworkConfig {
                generator: Some(generator),
                file: None,
                inverse_demand: InverseDemand::CifuentesPiecewise,
                liquid_fraction: alpha,
                clearing: ClearingControl::default(),
            }),
            grid: None,
        }],
    })
}
