//! Resumable checkpoint directory layout:
//!
//! ```text
//! <dir>/manifest.json   config snapshot, next episode, RNG state
//! <dir>/agent_XX.spnn   role byte + 4 network records (actor, critic,
//!                       target actor, target critic); live networks carry
//!                       their optimizer state
//! <dir>/replay.bin      exact replay buffer image (ring order + cursor)
//! ```
//!
//! Everything round-trips bit-exactly, so a resumed run continues as if it
//! had never stopped.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Role, WorldConfig};
use crate::error::TrainError;
use crate::neural::io::{read_network, write_network};
use crate::rewards::RewardConfig;

use super::{AgentLearner, ReplayBuffer, TrainConfig, Transition};

pub const FORMAT_VERSION: u32 = 1;
pub const BUFFER_MAGIC: &[u8; 5] = b"SPRB1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const BUFFER_FILE: &str = "replay.bin";

/// Serializable RNG snapshot (ChaCha seed, stream, and word position).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> RngState {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    pub world: WorldConfig,
    pub rewards: RewardConfig,
    pub training: TrainConfig,
    pub next_episode: usize,
    pub rng: RngState,
}

fn agent_file(dir: &Path, agent: usize) -> std::path::PathBuf {
    dir.join(format!("agent_{agent:02}.spnn"))
}

fn role_tag(role: Role) -> u8 {
    match role {
        Role::Pursuer => 0,
        Role::Scout => 1,
        Role::Evader => 2,
    }
}

fn role_from_tag(tag: u8) -> Result<Role, TrainError> {
    match tag {
        0 => Ok(Role::Pursuer),
        1 => Ok(Role::Scout),
        2 => Ok(Role::Evader),
        other => Err(TrainError::Checkpoint(format!("unknown role tag {other}"))),
    }
}

pub fn save(
    dir: &Path,
    manifest: &CheckpointManifest,
    learners: &[AgentLearner],
    buffer: &ReplayBuffer,
) -> Result<(), TrainError> {
    fs::create_dir_all(dir)?;
    let manifest_json = serde_json::to_string_pretty(manifest)
        .map_err(|e| TrainError::Checkpoint(format!("manifest serialization: {e}")))?;
    fs::write(dir.join(MANIFEST_FILE), manifest_json)?;

    for (i, learner) in learners.iter().enumerate() {
        let mut w = BufWriter::new(fs::File::create(agent_file(dir, i))?);
        w.write_all(&[role_tag(learner.role)])
            .map_err(TrainError::Io)?;
        write_network(&mut w, &learner.actor, Some(&learner.actor_opt))?;
        write_network(&mut w, &learner.critic, Some(&learner.critic_opt))?;
        write_network(&mut w, &learner.target_actor, None)?;
        write_network(&mut w, &learner.target_critic, None)?;
        w.flush().map_err(TrainError::Io)?;
    }

    let mut w = BufWriter::new(fs::File::create(dir.join(BUFFER_FILE))?);
    write_buffer(&mut w, buffer)?;
    w.flush().map_err(TrainError::Io)?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<CheckpointManifest, TrainError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| {
        TrainError::Checkpoint(format!("cannot read {}: {e}", path.display()))
    })?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)
        .map_err(|e| TrainError::Checkpoint(format!("bad manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(TrainError::Checkpoint(format!(
            "unsupported checkpoint format version {}",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

pub fn load_learners(dir: &Path, n_agents: usize) -> Result<Vec<AgentLearner>, TrainError> {
    let mut learners = Vec::with_capacity(n_agents);
    for i in 0..n_agents {
        let mut r = BufReader::new(fs::File::open(agent_file(dir, i))?);
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag).map_err(TrainError::Io)?;
        let role = role_from_tag(tag[0])?;
        let (actor, actor_opt) = read_network(&mut r)?;
        let (critic, critic_opt) = read_network(&mut r)?;
        let (target_actor, _) = read_network(&mut r)?;
        let (target_critic, _) = read_network(&mut r)?;
        let (actor_opt, critic_opt) = match (actor_opt, critic_opt) {
            (Some(a), Some(c)) => (a, c),
            _ => {
                return Err(TrainError::Checkpoint(format!(
                    "agent {i} live networks are missing optimizer state"
                )))
            }
        };
        learners.push(AgentLearner {
            role,
            actor,
            target_actor,
            critic,
            target_critic,
            actor_opt,
            critic_opt,
        });
    }
    Ok(learners)
}

pub fn load(dir: &Path) -> Result<(CheckpointManifest, Vec<AgentLearner>, ReplayBuffer), TrainError> {
    let manifest = load_manifest(dir)?;
    let learners = load_learners(dir, manifest.world.n_agents())?;
    let mut r = BufReader::new(fs::File::open(dir.join(BUFFER_FILE))?);
    let buffer = read_buffer(&mut r)?;
    Ok((manifest, learners, buffer))
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<(), TrainError> {
    w.write_all(&v.to_le_bytes()).map_err(TrainError::Io)
}

fn read_u64(r: &mut impl Read) -> Result<u64, TrainError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(TrainError::Io)?;
    Ok(u64::from_le_bytes(buf))
}

fn write_f64s(w: &mut impl Write, values: &[f64]) -> Result<(), TrainError> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(TrainError::Io)
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>, TrainError> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf).map_err(TrainError::Io)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_buffer(w: &mut impl Write, buffer: &ReplayBuffer) -> Result<(), TrainError> {
    w.write_all(BUFFER_MAGIC).map_err(TrainError::Io)?;
    let n_agents = buffer.n_agents();
    let obs_len = buffer
        .iter()
        .next()
        .map(|t| t.obs.first().map(Vec::len).unwrap_or(0))
        .unwrap_or(0);
    write_u64(w, n_agents as u64)?;
    write_u64(w, obs_len as u64)?;
    write_u64(w, buffer.capacity() as u64)?;
    write_u64(w, buffer.len() as u64)?;
    write_u64(w, buffer.cursor() as u64)?;
    for t in buffer.iter() {
        for o in &t.obs {
            write_f64s(w, o)?;
        }
        for o in &t.next_obs {
            write_f64s(w, o)?;
        }
        for a in &t.actions {
            write_f64s(w, a)?;
        }
        write_f64s(w, &t.rewards)?;
    }
    Ok(())
}

pub fn read_buffer(r: &mut impl Read) -> Result<ReplayBuffer, TrainError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(TrainError::Io)?;
    if &magic != BUFFER_MAGIC {
        return Err(TrainError::Checkpoint(format!(
            "bad replay magic {magic:?}"
        )));
    }
    let n_agents = read_u64(r)? as usize;
    let obs_len = read_u64(r)? as usize;
    let capacity = read_u64(r)? as usize;
    let len = read_u64(r)? as usize;
    let cursor = read_u64(r)? as usize;
    if capacity == 0 || len > capacity || cursor >= capacity.max(1) || n_agents == 0 {
        return Err(TrainError::Checkpoint(
            "inconsistent replay buffer header".into(),
        ));
    }
    let mut storage = Vec::with_capacity(len);
    for _ in 0..len {
        let mut obs = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            obs.push(read_f64s(r, obs_len)?);
        }
        let mut next_obs = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            next_obs.push(read_f64s(r, obs_len)?);
        }
        let mut actions = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            let a = read_f64s(r, 2)?;
            actions.push([a[0], a[1]]);
        }
        let rewards = read_f64s(r, n_agents)?;
        storage.push(Transition {
            obs,
            actions,
            rewards,
            next_obs,
        });
    }
    Ok(ReplayBuffer::restore(capacity, n_agents, storage, cursor))
}
