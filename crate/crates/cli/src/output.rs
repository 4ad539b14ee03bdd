//! CSV sinks for training and evaluation runs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pursuit_core::maddpg::EpisodeSink;
use pursuit_core::metrics::{
    self, EpisodeAggregate, EpisodeLog,
};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const OBSTACLE_FILE: &str = "obstacles.csv";

/// Streams episodes into `trajectory.csv`, `aggregate.csv`, and
/// `obstacles.csv` under one run directory.
pub struct CsvSink {
    trajectory: BufWriter<File>,
    aggregate: BufWriter<File>,
    obstacles: BufWriter<File>,
}

impl CsvSink {
    pub fn create(dir: &Path) -> std::io::Result<CsvSink> {
        fs::create_dir_all(dir)?;
        let mut trajectory = BufWriter::new(File::create(dir.join(TRAJECTORY_FILE))?);
        let mut aggregate = BufWriter::new(File::create(dir.join(AGGREGATE_FILE))?);
        let mut obstacles = BufWriter::new(File::create(dir.join(OBSTACLE_FILE))?);
        metrics::write_trajectory_header(&mut trajectory)?;
        metrics::write_aggregate_header(&mut aggregate)?;
        metrics::write_obstacle_header(&mut obstacles)?;
        Ok(CsvSink {
            trajectory,
            aggregate,
            obstacles,
        })
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.trajectory.flush()?;
        self.aggregate.flush()?;
        self.obstacles.flush()
    }
}

impl EpisodeSink for CsvSink {
    fn on_episode(
        &mut self,
        log: &EpisodeLog,
        aggregate: &EpisodeAggregate,
    ) -> std::io::Result<()> {
        metrics::write_trajectory_rows(&mut self.trajectory, log)?;
        metrics::write_aggregate_row(&mut self.aggregate, aggregate)?;
        metrics::write_obstacle_rows(&mut self.obstacles, log)
    }
}

/// Output directory precedence: `--out` flag, then `PURSUIT_OUT_DIR`, then
/// the config's `output_dir`.
pub fn resolve_out_dir(config_dir: &Path, flag: Option<PathBuf>) -> PathBuf {
    if let Some(out) = flag {
        return out;
    }
    if let Ok(env_dir) = std::env::var("PURSUIT_OUT_DIR") {
        if !env_dir.is_empty() {
            return PathBuf::from(env_dir);
        }
    }
    config_dir.to_path_buf()
}
