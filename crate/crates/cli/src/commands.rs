//! Implementations of the CLI subcommands.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use pursuit_core::maddpg::{
    checkpoint, evaluate, ProgressEvent, RunHooks, Trainer,
};
use pursuit_core::metrics::{self, EpisodeAggregate};

use crate::config::{load_config, RunConfig};
use crate::output::{resolve_out_dir, CsvSink, AGGREGATE_FILE, OBSTACLE_FILE};
use crate::svg;

pub const PROGRESS_EVERY: usize = 100;

fn print_progress(event: &ProgressEvent) {
    let a = event.aggregate;
    println!(
        "[progress] episode={} noise={:.4} critic_loss={:.6} actor_q={:.4} min_d={:.4} avg_d={:.4} max_d={:.4} cov={:.4} rew_p={:.4} rew_s={:.4} rew_e={:.4}",
        event.episode,
        event.noise_std,
        event.mean_critic_loss,
        event.mean_actor_objective,
        a.min_d,
        a.avg_d,
        a.max_d,
        a.coverage,
        a.rew_pursuer,
        a.rew_scout,
        a.rew_evader,
    );
}

fn write_run_manifest(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let json = serde_json::to_string_pretty(cfg).context("serializing run manifest")?;
    fs::write(dir.join("run_manifest.json"), json)
        .with_context(|| format!("writing run manifest under {}", dir.display()))?;
    Ok(())
}

/// Train per the config file, streaming CSVs and resumable checkpoints into
/// the output directory.
pub fn cmd_train(
    config_path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    resume: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = seed {
        if resume.is_some() {
            bail!("--seed cannot be combined with --resume; the checkpoint pins the RNG state");
        }
        cfg.training.seed = seed;
    }
    let out_dir = resolve_out_dir(&cfg.output_dir, out);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    write_run_manifest(&out_dir, &cfg)?;

    let mut trainer = match &resume {
        Some(ckpt_dir) => {
            let mut trainer = Trainer::resume(ckpt_dir)
                .with_context(|| format!("resuming from {}", ckpt_dir.display()))?;
            if trainer.world() != &cfg.world {
                bail!("config [world] section does not match the checkpoint being resumed");
            }
            if trainer.rewards() != &cfg.rewards {
                bail!("config [rewards] section does not match the checkpoint being resumed");
            }
            let mut expected = trainer.config().clone();
            expected.episodes = cfg.training.episodes;
            if expected != cfg.training {
                bail!(
                    "config [training] section does not match the checkpoint being resumed \
                     (only `episodes` may change)"
                );
            }
            trainer.set_episodes(cfg.training.episodes)?;
            println!(
                "[train] resumed at episode {} of {}",
                trainer.next_episode(),
                cfg.training.episodes
            );
            trainer
        }
        None => Trainer::new(cfg.world.clone(), cfg.rewards.clone(), cfg.training.clone())?,
    };

    let mut sink = CsvSink::create(&out_dir)?;
    let checkpoint_dir = out_dir.join("checkpoints");
    let total = cfg.training.episodes;
    // Update rounds may not land in every episode; carry the last known
    // losses so periodic progress lines stay informative.
    let mut last_critic_loss = f64::NAN;
    let mut last_actor_q = f64::NAN;
    let mut progress = |event: &ProgressEvent| {
        if event.mean_critic_loss.is_finite() {
            last_critic_loss = event.mean_critic_loss;
        }
        if event.mean_actor_objective.is_finite() {
            last_actor_q = event.mean_actor_objective;
        }
        if event.episode % PROGRESS_EVERY == 0 || event.episode + 1 == total {
            let patched = ProgressEvent {
                episode: event.episode,
                noise_std: event.noise_std,
                mean_critic_loss: last_critic_loss,
                mean_actor_objective: last_actor_q,
                aggregate: event.aggregate,
            };
            print_progress(&patched);
        }
    };
    let mut hooks = RunHooks {
        sink: Some(&mut sink),
        progress: Some(&mut progress),
        checkpoint_dir: Some(&checkpoint_dir),
    };
    let aggregates = trainer.run(&mut hooks)?;
    sink.finish()?;

    println!(
        "[train] done: {} episodes, outputs in {}, final checkpoint {}",
        aggregates.len(),
        out_dir.display(),
        checkpoint_dir
            .join(format!("ep_{:06}", trainer.next_episode()))
            .display()
    );
    Ok(())
}

fn print_distance_table(aggregates: &[EpisodeAggregate], skip: usize) -> Result<()> {
    let min: Vec<f64> = aggregates.iter().map(|a| a.min_d).collect();
    let avg: Vec<f64> = aggregates.iter().map(|a| a.avg_d).collect();
    let max: Vec<f64> = aggregates.iter().map(|a| a.max_d).collect();
    println!("mean of min dist | mean of ave dist | mean of max dist");
    println!(
        "{:.4} | {:.4} | {:.4}",
        metrics::truncated_mean(&min, skip)?,
        metrics::truncated_mean(&avg, skip)?,
        metrics::truncated_mean(&max, skip)?
    );
    Ok(())
}

/// Noise-free rollouts from a checkpoint; emits CSVs and prints the distance
/// table for the run.
pub fn cmd_eval(
    checkpoint_dir: &Path,
    episodes: usize,
    seed: u64,
    out: Option<PathBuf>,
    skip: usize,
) -> Result<()> {
    let manifest = checkpoint::load_manifest(checkpoint_dir)
        .with_context(|| format!("loading checkpoint {}", checkpoint_dir.display()))?;
    let learners = checkpoint::load_learners(checkpoint_dir, manifest.world.n_agents())?;
    let out_dir = resolve_out_dir(&checkpoint_dir.join(format!("eval_seed{seed}")), out);
    let mut sink = CsvSink::create(&out_dir)?;
    let aggregates = evaluate(
        &manifest.world,
        &manifest.rewards,
        &learners,
        episodes,
        seed,
        Some(&mut sink),
    )?;
    sink.finish()?;
    println!(
        "[eval] {} episodes from {} (outputs in {})",
        episodes,
        checkpoint_dir.display(),
        out_dir.display()
    );
    print_distance_table(&aggregates, skip)?;
    Ok(())
}

/// Train one model per pursuer count on the double-target no-scout scenario;
/// report the distance table and the smallest sufficient team size.
pub fn cmd_sweep_pursuers(
    config_path: &Path,
    min: usize,
    max: usize,
    threshold: f64,
    seed: Option<u64>,
    out: Option<PathBuf>,
    skip: Option<usize>,
    mono_tolerance: f64,
) -> Result<()> {
    if min < 1 {
        bail!("--min must be at least 1");
    }
    if max < min {
        bail!("--max must be >= --min");
    }
    let base = load_config(config_path)?;
    let out_dir = resolve_out_dir(&base.output_dir, out).join("sweep");
    fs::create_dir_all(&out_dir)?;
    let base_seed = seed.unwrap_or(base.training.seed);
    let episodes = base.training.episodes;
    let skip = skip.unwrap_or_else(|| 2000.min(episodes / 2));

    let mut results: Vec<(usize, f64)> = Vec::new();
    for n_p in min..=max {
        let mut cfg = base.clone();
        cfg.world.n_scouts = 0;
        cfg.world.n_evaders = 2;
        cfg.world.n_pursuers = n_p;
        cfg.training.seed = base_seed.wrapping_add(n_p as u64);
        cfg.validate()
            .with_context(|| format!("sweep cell n_p={n_p}"))?;
        let cell_dir = out_dir.join(format!("np_{n_p}"));
        let mut sink = CsvSink::create(&cell_dir)?;
        let mut trainer = Trainer::new(cfg.world, cfg.rewards, cfg.training)?;
        let mut progress = |event: &ProgressEvent| {
            if event.episode % 500 == 0 {
                print!("[sweep] n_p={n_p} ");
                print_progress(event);
            }
        };
        let mut hooks = RunHooks {
            sink: Some(&mut sink),
            progress: Some(&mut progress),
            checkpoint_dir: None,
        };
        let aggregates = trainer.run(&mut hooks)?;
        sink.finish()?;
        let min_series: Vec<f64> = aggregates.iter().map(|a| a.min_d).collect();
        let mean_min = metrics::truncated_mean(&min_series, skip)?;
        println!("[sweep] n_p={n_p} mean_min_dist={mean_min:.4}");
        results.push((n_p, mean_min));
    }

    let table_path = out_dir.join("sweep.csv");
    let mut table = fs::File::create(&table_path)?;
    writeln!(table, "n_p,mean_min_dist")?;
    for (n_p, v) in &results {
        writeln!(table, "{n_p},{v}")?;
    }

    for pair in results.windows(2) {
        let (prev_n, prev_v) = pair[0];
        let (n, v) = pair[1];
        if v > prev_v + mono_tolerance {
            println!(
                "[sweep] warning: mean min distance increased from n_p={prev_n} ({prev_v:.4}) to n_p={n} ({v:.4})"
            );
        }
    }
    match results.iter().find(|(_, v)| *v < threshold) {
        Some((n_p, v)) => println!(
            "[sweep] smallest sufficient n_p: {n_p} (mean min dist {v:.4} < {threshold} m)"
        ),
        None => println!("[sweep] no pursuer count in [{min}, {max}] reached the {threshold} m threshold"),
    }
    println!("[sweep] table written to {}", table_path.display());
    Ok(())
}

/// Render one episode of a trajectory CSV as an SVG drawing.
pub fn cmd_replay(
    log_csv: &Path,
    svg_out: &Path,
    episode: Option<usize>,
    obstacles_csv: Option<PathBuf>,
    half_extent: f64,
) -> Result<()> {
    let file = fs::File::open(log_csv)
        .with_context(|| format!("cannot open trajectory CSV {}", log_csv.display()))?;
    let logs = metrics::read_trajectory(BufReader::new(file))?;

    let obstacle_path = obstacles_csv.or_else(|| {
        let sibling = log_csv.with_file_name(OBSTACLE_FILE);
        sibling.exists().then_some(sibling)
    });
    let obstacle_lists = match &obstacle_path {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("cannot open obstacle CSV {}", path.display()))?;
            metrics::read_obstacles(BufReader::new(file))?
        }
        None => Vec::new(),
    };

    let (rows, obstacles) = match episode {
        Some(ep) => {
            let log = logs
                .iter()
                .find(|l| l.episode == ep)
                .with_context(|| format!("episode {ep} not present in {}", log_csv.display()))?;
            (log.rows.as_slice(), lookup_obstacles(&obstacle_lists, ep))
        }
        None => match logs.first() {
            Some(log) => (
                log.rows.as_slice(),
                lookup_obstacles(&obstacle_lists, log.episode),
            ),
            None => (&[][..], &[][..]),
        },
    };

    let rendered = svg::render(rows, obstacles, half_extent);
    fs::write(svg_out, rendered)
        .with_context(|| format!("writing SVG to {}", svg_out.display()))?;
    println!(
        "[replay] wrote {} ({} rows, {} obstacles)",
        svg_out.display(),
        rows.len(),
        obstacles.len()
    );
    Ok(())
}

fn lookup_obstacles(lists: &[(usize, Vec<pursuit_core::Obstacle>)], episode: usize) -> &[pursuit_core::Obstacle] {
    lists
        .iter()
        .find(|(ep, _)| *ep == episode)
        .map(|(_, v)| v.as_slice())
        .unwrap_or(&[])
}

/// Per-episode and overall coverage report for a trajectory CSV.
pub fn cmd_coverage_report(
    log_csv: &Path,
    sensor_range: f64,
    scouts_only: bool,
    half_extent: f64,
) -> Result<()> {
    let file = fs::File::open(log_csv)
        .with_context(|| format!("cannot open trajectory CSV {}", log_csv.display()))?;
    let logs = metrics::read_trajectory(BufReader::new(file))?;
    if logs.is_empty() {
        println!("[coverage] no episodes found");
        return Ok(());
    }
    let step_means = metrics::coverage_series(&logs, sensor_range, half_extent, scouts_only);
    let mut union_sum = 0.0;
    for (log, step_mean) in logs.iter().zip(&step_means) {
        let union = metrics::episode_union_coverage(log, sensor_range, half_extent, scouts_only);
        union_sum += union;
        println!(
            "[coverage] episode={} step_mean={:.4} union={:.4}",
            log.episode, step_mean, union
        );
    }
    println!(
        "[coverage] episodes={} range={} scouts_only={} mean_step={:.4} mean_union={:.4}",
        logs.len(),
        sensor_range,
        scouts_only,
        step_means.iter().sum::<f64>() / step_means.len() as f64,
        union_sum / logs.len() as f64
    );
    Ok(())
}

/// Re-read the aggregate CSV of a finished run (sanity/report helper).
pub fn read_run_aggregates(run_dir: &Path) -> Result<Vec<EpisodeAggregate>> {
    let path = run_dir.join(AGGREGATE_FILE);
    let file =
        fs::File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(metrics::read_aggregates(BufReader::new(file))?)
}
