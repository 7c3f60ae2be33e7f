use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use sysrisk::run::{self, Overrides, RunConfig};

/// Set-valued systemic risk measures over simulated financial systems.
#[derive(Parser, Debug)]
#[command(name = "sysrisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate the acceptable capital set for every configured model.
    Run(Common),
    /// Check a configuration without running the grid search.
    Validate(Common),
    /// Print a preset as TOML.
    Preset {
        /// agg_lognormal, two_tier:<A1..C6> or three_tier:<alpha>
        name: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: agg_lognormal, two_tier:<A1..C6>,
    /// three_tier:<alpha>.
    #[arg(long)]
    preset: Option<String>,
    /// Master seed; replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo scenarios.
    #[arg(long)]
    scenarios: Option<usize>,
    /// Lattice points per dimension.
    #[arg(long)]
    grid_res: Option<usize>,
    /// Number of factor-2 refinements after the initial search.
    #[arg(long)]
    refine: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// EAR weight vectors, e.g. "1,1;10,90".
    #[arg(long)]
    ear_weights: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn parse_weights(text: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|vector| {
            vector
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("bad EAR weight {v:?}"))
                })
                .collect()
        })
        .collect()
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), None) => RunConfig::load(path)
                .with_context(|| format!("reading {}", path.display()))?,
            (None, Some(name)) => run::preset(name)?,
            _ => bail!(sysrisk::Error::Config("pass exactly one of --config or --preset".into())),
        };
        let ear_weights = match &self.ear_weights {
            Some(text) => Some(parse_weights(text).map_err(|e| sysrisk::Error::Config(e.to_string()))?),
            None => None,
        };
        config.apply(&Overrides {
            seed: self.seed,
            n_scenarios: self.scenarios,
            grid_points: self.grid_res,
            refine: self.refine,
            output_dir: self.out.clone(),
            ear_weights,
        });
        run::configure_threads(self.threads)?;
        Ok(config)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<sysrisk::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(common) => run_cmd(&common),
        Command::Validate(common) => validate_cmd(&common),
        Command::Preset { name } => run::preset(&name)
            .and_then(|c| c.to_toml_string())
            .map(|text| print!("{text}"))
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run_cmd(common: &Common) -> anyhow::Result<()> {
    let config = common.load()?;
    let summary = run::execute(config, None)?;
    for m in &summary.manifest.models {
        println!(
            "{}: {} oracle calls, {} inner / {} outer frontier points, {:.2}s",
            m.name, m.oracle_calls, m.inner_points, m.outer_points, m.runtime_seconds
        );
        for e in &m.ears {
            let first = e.minimizers.first().cloned().unwrap_or_default();
            println!(
                "  EAR w={:?}: min {} at {:?} ({} tied point(s)){}",
                e.weights,
                e.min_value,
                first,
                e.minimizers.len(),
                if e.on_box_boundary { ", on box boundary" } else { "" }
            );
        }
    }
    println!("artifacts in {}", summary.output_dir.display());
    if let Some(err) = summary.degenerate_error() {
        return Err(err.into());
    }
    Ok(())
}

fn validate_cmd(common: &Common) -> anyhow::Result<()> {
    let config = common.load()?;
    let report = run::validate(config)?;
    for line in report.lines {
        println!("{line}");
    }
    println!("ok");
    Ok(())
}
