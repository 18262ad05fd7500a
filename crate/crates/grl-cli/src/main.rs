//! `grl` — seeded experiment runner for global-reward MDP solvers.
//!
//! Subcommands: `run` executes a JSON experiment config and writes
//! records.csv / summary.csv / plot.svg; `preset` prints a canned config;
//! `plot` re-renders a records file; `check-guarantees` instantiates a config
//! and reports curvature and the certified one-iteration floor.
//!
//! Exit codes: 0 on success, 2 on configuration or input errors, 3 on
//! numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grl_core::harness::{
    curvature_pair, emit_plot, instantiate_run, preset, read_records_from_path, run_experiment,
    write_records_to_path, write_summary_to_path, ExperimentConfig, SummaryRow,
};
use grl_core::{approximation_alpha, Error, GuaranteeCase, Result, RewardKind};

#[derive(Parser)]
#[command(name = "grl", version, about = "Global-reward MDP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config over its seed sweep and write records.csv,
    /// summary.csv, and plot.svg.
    Run {
        /// Experiment configuration (JSON).
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config's output_dir; default ".").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock times in the CSV. Off by default so identical
        /// reruns produce byte-identical files.
        #[arg(long)]
        timings: bool,
    },
    /// Print a named benchmark config as JSON, or write it with --out.
    Preset {
        /// One of: design, synergies, safe_coverage, coverage,
        /// bounded_coverage, entropy.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a records.csv file to an SVG convergence plot.
    Plot {
        records: PathBuf,
        /// Output file (default: the records path with extension .svg).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Instantiate a config's environment and reward, compute curvature, and
    /// report the certified first-iteration guarantee.
    CheckGuarantees {
        /// Experiment configuration (JSON).
        config: PathBuf,
        /// Run index to instantiate; instances vary per run when the reward
        /// has random draws.
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Numerical(_) => 3u8,
                _ => 2u8,
            })
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, timings } => cmd_run(&config, seed, out, timings),
        Command::Preset { name, out } => cmd_preset(&name, out),
        Command::Plot { records, out } => cmd_plot(&records, out),
        Command::CheckGuarantees { config, run } => cmd_check_guarantees(&config, run),
    }
}

fn cmd_run(path: &Path, seed: Option<u64>, out: Option<PathBuf>, timings: bool) -> Result<()> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if timings {
        config.record_wall_time = true;
    }
    let dir = out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;

    let output = run_experiment(&config)?;

    let records_path = dir.join("records.csv");
    let summary_path = dir.join("summary.csv");
    let plot_path = dir.join("plot.svg");
    write_records_to_path(&output.records, &records_path)?;
    write_summary_to_path(&output.summary, &summary_path)?;
    std::fs::write(&plot_path, emit_plot(&output.records, &config.name))?;

    println!(
        "{}: {} run{} x {} algorithm{}, base seed {}",
        config.name,
        config.runs,
        plural(config.runs),
        config.algorithms.len(),
        plural(config.algorithms.len()),
        config.seed,
    );
    for row in final_rows(&output.summary) {
        println!(
            "  {:<14} final mean objective {:.4} over {} run{}",
            row.algorithm,
            row.mean_objective,
            row.runs,
            plural(row.runs),
        );
    }
    println!(
        "wrote {}, {}, {}",
        records_path.display(),
        summary_path.display(),
        plot_path.display(),
    );
    Ok(())
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

/// Last summary row of each algorithm, in the summary's (sorted) order.
fn final_rows(summary: &[SummaryRow]) -> Vec<&SummaryRow> {
    let mut finals: Vec<&SummaryRow> = Vec::new();
    for row in summary {
        match finals.last() {
            Some(last) if last.algorithm == row.algorithm => {
                *finals.last_mut().unwrap() = row;
            }
            _ => finals.push(row),
        }
    }
    finals
}

fn cmd_preset(name: &str, out: Option<PathBuf>) -> Result<()> {
    let config = preset(name)?;
    let json = config.to_json();
    match out {
        Some(path) => {
            std::fs::write(&path, json)?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_plot(records_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let records = read_records_from_path(records_path)?;
    let title = records_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("records");
    let svg = emit_plot(&records, title);
    let out = out.unwrap_or_else(|| records_path.with_extension("svg"));
    std::fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_check_guarantees(path: &Path, run: usize) -> Result<()> {
    let config = ExperimentConfig::from_path(path)?;
    if run >= config.runs {
        return Err(Error::InvalidConfig(format!(
            "run index {run} out of range: config declares {} run{}",
            config.runs,
            plural(config.runs),
        )));
    }
    let (gmdp, reward) = instantiate_run(&config, run)?;
    let ground = gmdp.ground();
    let (k_sub, k_sup) = curvature_pair(reward.as_ref(), &ground);
    let (case, case_name) = match reward.kind() {
        RewardKind::Submodular => (GuaranteeCase::Submodular { curvature: k_sub }, "submodular"),
        RewardKind::Supermodular => {
            (GuaranteeCase::Supermodular { curvature: k_sup }, "supermodular")
        }
        RewardKind::Bp | RewardKind::Arbitrary => (
            GuaranteeCase::Bp {
                submodular_curvature: k_sub,
                supermodular_curvature: k_sup,
            },
            "submodular + supermodular decomposition",
        ),
    };
    let alpha = approximation_alpha(&case);

    println!(
        "instance : {} run {run} (seed {})",
        config.name,
        config.seed.wrapping_add(run as u64),
    );
    println!(
        "grid     : {}x{}, horizon {}, {} states, ground set {}",
        config.environment.width,
        config.environment.height,
        config.environment.horizon,
        gmdp.num_states,
        ground.size(),
    );
    println!("reward   : {} ({case_name})", reward_kind_name(&config));
    println!("curvature: k_sub = {k_sub:.6}, k_sup = {k_sup:.6}");
    if alpha < 1.0 {
        println!("alpha    : {alpha:.6}");
        println!(
            "floor    : the first accepted iterate achieves >= {:.2}% of the optimum",
            (1.0 - alpha) * 100.0,
        );
    } else {
        println!("alpha    : {alpha:.6} (>= 1)");
        println!("floor    : vacuous — no certified fraction of the optimum at this curvature");
    }
    Ok(())
}

/// The configured reward kind's JSON name (e.g. "safe_coverage").
fn reward_kind_name(config: &ExperimentConfig) -> String {
    serde_json::to_value(config.reward.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "unknown".to_string())
}
