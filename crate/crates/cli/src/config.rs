//! Run configuration: a sectioned TOML file over named scenario presets.
//!
//! A config file may name a `scenario` preset and override any subset of keys
//! in the `[world]`, `[rewards]`, and `[training]` sections. Unknown keys are
//! hard errors: a silently ignored typo in a reward constant would corrupt an
//! experiment.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pursuit_core::maddpg::TrainConfig;
use pursuit_core::rewards::RewardConfig;
use pursuit_core::WorldConfig;

pub const PRESET_NAMES: [&str; 3] = ["multi-target", "role-based", "drone-demo"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub output_dir: PathBuf,
    pub world: WorldConfig,
    pub rewards: RewardConfig,
    pub training: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            output_dir: PathBuf::from("runs/out"),
            world: WorldConfig::default(),
            rewards: RewardConfig::default(),
            training: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.rewards.validate()?;
        self.training.validate()?;
        if self.output_dir.as_os_str().is_empty() {
            bail!("invalid config: `output_dir` must not be empty");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing run config")
    }
}

/// The named scenario presets. The multi-target scenario is the defaults.
pub fn preset(name: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    cfg.scenario = Some(name.to_string());
    cfg.output_dir = PathBuf::from(format!("runs/{name}"));
    match name {
        "multi-target" => {
            cfg.world.n_pursuers = 5;
            cfg.world.n_scouts = 0;
            cfg.world.n_evaders = 2;
        }
        "role-based" => {
            cfg.world.n_pursuers = 5;
            cfg.world.n_scouts = 5;
            cfg.world.n_evaders = 2;
        }
        "drone-demo" => {
            cfg.world.n_pursuers = 2;
            cfg.world.n_scouts = 3;
            cfg.world.n_evaders = 1;
        }
        other => bail!(
            "unknown scenario preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ),
    }
    Ok(cfg)
}

fn merge_toml(base: &mut toml::Value, overlay: &toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(base_table), toml::Value::Table(overlay_table)) => {
            for (key, value) in overlay_table {
                match base_table.get_mut(key) {
                    Some(existing) if existing.is_table() && value.is_table() => {
                        merge_toml(existing, value);
                    }
                    _ => {
                        base_table.insert(key.clone(), value.clone());
                    }
                }
            }
        }
        (base, overlay) => *base = overlay.clone(),
    }
}

/// Parse a config from TOML text. The preset named by `scenario` (if any)
/// resolves first; explicit keys override it; the result is validated.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let overlay: toml::Value = toml::from_str(text).context("parsing config file")?;
    let base = match overlay.get("scenario") {
        Some(toml::Value::String(name)) => preset(name)?,
        Some(other) => bail!("invalid config: `scenario` must be a string, got {other}"),
        None => RunConfig::default(),
    };
    let mut merged = toml::Value::try_from(&base).context("serializing preset")?;
    merge_toml(&mut merged, &overlay);
    let cfg: RunConfig = merged
        .try_into()
        .map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config file {}", path.display()))
}
