use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arl::envs::scripted_demos_by_name;
use arl::rng::{stream, Stream};
use arl_harness::error::{HarnessError, Result};
use arl_harness::plot::{emit_heatmaps, emit_plot_data, PlotKind};
use arl_harness::run::default_out_root;
use arl_harness::{
    aggregate_dir, parse_config, run_experiment, sweep_reset_frequency, ExperimentConfig,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arl",
    version,
    about = "Reset-free RL experiments at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output root (default: $ARL_OUT_DIR, else ./runs).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Naive-agent reset-frequency sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        periods: Vec<u64>,
        /// Number of seeds, starting from the config's seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Bootstrap cut periods; `none` disables the cut.
        #[arg(long, value_delimiter = ',', default_value = "none")]
        boundaries: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean and standard error across the runs below a directory.
    Aggregate {
        #[arg(long)]
        runs: PathBuf,
    },
    /// Plot-ready CSVs from the runs below a directory.
    Plotdata {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Restrict to these algorithms (default: all).
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scripted demonstrations for an environment.
    Demos {
        #[arg(long)]
        env: String,
        #[arg(long)]
        forward: usize,
        #[arg(long)]
        backward: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text)
}

fn parse_boundaries(items: &[String]) -> Result<Vec<Option<u64>>> {
    items
        .iter()
        .map(|s| match s.as_str() {
            "none" => Ok(None),
            n => n
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::config(format!("bad boundary '{n}'"))),
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (_, manifest) = run_experiment(&cfg, out.as_deref())?;
            println!(
                "{}",
                serde_json::to_string(&manifest).expect("serialisable")
            );
        }
        Command::Sweep {
            config,
            periods,
            seeds,
            boundaries,
            out,
        } => {
            let cfg = load_config(&config)?;
            let seeds: Vec<u64> = (0..seeds).map(|i| cfg.seed + i).collect();
            let root = out
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(default_out_root);
            let res = sweep_reset_frequency(
                &cfg,
                &periods,
                &seeds,
                &parse_boundaries(&boundaries)?,
                Some(&root),
            )?;
            println!("{} runs written to {}", res.outputs.len(), root.display());
        }
        Command::Aggregate { runs } => {
            let rows = aggregate_dir(&runs)?;
            println!(
                "{} aggregate rows written to {}",
                rows.len(),
                runs.display()
            );
        }
        Command::Plotdata {
            runs,
            kind,
            algorithms,
            out,
        } => {
            let out = out.unwrap_or_else(|| runs.join("plots"));
            let files = match kind {
                PlotKind::VisitationHeatmap => emit_heatmaps(&runs, &algorithms, &out)?,
                _ => emit_plot_data(&aggregate_dir(&runs)?, kind, &algorithms, &out)?,
            };
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Demos {
            env,
            forward,
            backward,
            out,
            seed,
        } => {
            let demos =
                scripted_demos_by_name(&env, forward, backward, &mut stream(seed, Stream::Demos))?;
            let text = serde_json::to_string_pretty(&demos).expect("serialisable");
            fs::write(&out, text).map_err(|e| HarnessError::io(&out, e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line =
                serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
