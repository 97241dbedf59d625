//! Command-line runner: single runs, parameter sweeps, the angular
//! threshold table and config validation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use drg_core::config::{self, ScenarioConfig};
use drg_core::geom::{solve_theta_min_root, CR_THRESHOLD_MAX};
use drg_core::metrics::RunMetrics;
use drg_core::output;

#[derive(Parser)]
#[command(
    name = "drg-sim",
    version,
    about = "Deterministic simulator for geocast dissemination in vehicular networks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write results here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured scenario once and emit one metrics row
    Run {
        /// Scenario config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the full density x protocol x replica grid
    Sweep {
        /// Scenario config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's replica count
        #[arg(long)]
        replicas: Option<u32>,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimum-angle table: for each coverage-ratio threshold, the
    /// sender-pair distance and angle at which suppression engages
    Theta {
        /// Threshold values in (0, 0.78]
        #[arg(required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check a config against every parameter bound
    Validate {
        /// Scenario config (JSON)
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { config, seed, output } => {
            let cfg = load_validated(&config, seed, None)?;
            let row = config::run_single(&cfg, cfg.protocol, cfg.base_density(), cfg.seed);
            emit(&[row], &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, seed, replicas, jobs, output } => {
            let cfg = load_validated(&config, seed, replicas)?;
            let rows = run_sweep(&cfg, jobs)?;
            emit(&rows, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Theta { x, output } => {
            let text = theta_table(&x, output.format)?;
            write_out(&text, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { config } => {
            let cfg = load_config(&config)?;
            let violations = config::validate(&cfg);
            if violations.is_empty() {
                println!("ok: {} is valid", config.display());
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    eprintln!("invalid: {v}");
                }
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
}

fn load_validated(
    path: &PathBuf,
    seed: Option<u64>,
    replicas: Option<u32>,
) -> Result<ScenarioConfig> {
    let mut cfg = load_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = replicas {
        cfg.replicas = r;
    }
    let violations = config::validate(&cfg);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("invalid: {v}");
        }
        bail!("{} violated parameter bounds", path.display());
    }
    Ok(cfg)
}

/// Runs the sweep grid, in parallel when requested; output order is the
/// plan order regardless of completion order.
fn run_sweep(cfg: &ScenarioConfig, jobs: Option<usize>) -> Result<Vec<RunMetrics>> {
    let plan = config::sweep_plan(cfg);
    let run_all = || {
        use rayon::prelude::*;
        plan.par_iter()
            .map(|&(protocol, density, seed)| config::run_single(cfg, protocol, density, seed))
            .collect::<Vec<_>>()
    };
    let rows = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(run_all),
        None => run_all(),
    };
    Ok(rows)
}

fn theta_table(xs: &[f64], format: Format) -> Result<String> {
    let mut xs = xs.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (d_root, theta) = solve_theta_min_root(x).map_err(|e| {
            anyhow::anyhow!("x = {x}: {e} (thresholds must lie in (0, {CR_THRESHOLD_MAX}])")
        })?;
        rows.push((x, d_root, theta.to_degrees()));
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("x,d_root,theta_min_deg\n");
            for (x, d, t) in rows {
                out.push_str(&format!("{x},{d},{t}\n"));
            }
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|(x, d, t)| {
                    serde_json::json!({ "x": x, "d_root": d, "theta_min_deg": t })
                })
                .collect();
            out = serde_json::to_string_pretty(&arr)?;
            out.push('\n');
        }
    }
    Ok(out)
}

fn emit(rows: &[RunMetrics], output: &OutputArgs) -> Result<()> {
    let text = match output.format {
        Format::Csv => output::to_csv(rows),
        Format::Json => output::to_json(rows),
    };
    write_out(&text, output)
}

fn write_out(text: &str, output: &OutputArgs) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
