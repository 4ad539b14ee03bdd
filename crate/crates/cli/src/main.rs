use std::path::PathBuf;

use clap::{Parser, Subcommand};

use pursuit_cli::commands;

/// Trainer and tooling for decentralized multi-target pursuit-evasion swarms.
#[derive(Parser)]
#[command(name = "pursuit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train policies per a TOML run config.
    Train {
        /// Path to the run config (TOML).
        config: PathBuf,
        /// Override the training seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides PURSUIT_OUT_DIR and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume from a checkpoint directory (e.g. runs/out/checkpoints/ep_001000).
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Noise-free evaluation rollouts from a checkpoint directory.
    Eval {
        /// Checkpoint directory containing manifest.json and agent files.
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for evaluation CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Episodes to drop before averaging the printed distance table.
        #[arg(long, default_value_t = 0)]
        skip: usize,
    },
    /// Train one model per pursuer count on the double-target no-scout
    /// scenario and report when the mean min distance beats the threshold.
    SweepPursuers {
        /// Path to the base run config (TOML).
        config: PathBuf,
        #[arg(long, default_value_t = 2)]
        min: usize,
        #[arg(long, default_value_t = 6)]
        max: usize,
        /// Sensory-range threshold on the truncated mean min distance, meters.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Base seed; each cell uses seed + n_p.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Episodes truncated before averaging; default min(2000, episodes/2).
        #[arg(long)]
        skip: Option<usize>,
        /// Tolerance before flagging a non-monotonic cell, meters.
        #[arg(long, default_value_t = 0.05)]
        mono_tolerance: f64,
    },
    /// Render a trajectory CSV episode as an SVG drawing.
    Replay {
        /// Path to a trajectory CSV.
        log: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        svg: PathBuf,
        /// Episode to render (default: first in the file).
        #[arg(long)]
        episode: Option<usize>,
        /// Obstacle CSV (default: obstacles.csv next to the log).
        #[arg(long)]
        obstacles: Option<PathBuf>,
        #[arg(long, default_value_t = 3.0)]
        half_extent: f64,
    },
    /// Per-episode sensory coverage report for a trajectory CSV.
    CoverageReport {
        /// Path to a trajectory CSV.
        log: PathBuf,
        /// Sensor range in meters.
        #[arg(long, default_value_t = 0.5)]
        range: f64,
        /// Count scout positions only instead of the whole team.
        #[arg(long)]
        scouts_only: bool,
        #[arg(long, default_value_t = 3.0)]
        half_extent: f64,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train {
            config,
            seed,
            out,
            resume,
        } => commands::cmd_train(&config, seed, out, resume),
        Command::Eval {
            checkpoint,
            episodes,
            seed,
            out,
            skip,
        } => commands::cmd_eval(&checkpoint, episodes, seed, out, skip),
        Command::SweepPursuers {
            config,
            min,
            max,
            threshold,
            seed,
            out,
            skip,
            mono_tolerance,
        } => commands::cmd_sweep_pursuers(
            &config,
            min,
            max,
            threshold,
            seed,
            out,
            skip,
            mono_tolerance,
        ),
        Command::Replay {
            log,
            svg,
            episode,
            obstacles,
            half_extent,
        } => commands::cmd_replay(&log, &svg, episode, obstacles, half_extent),
        Command::CoverageReport {
            log,
            range,
            scouts_only,
            half_extent,
        } => commands::cmd_coverage_report(&log, range, scouts_only, half_extent),
    }
}
