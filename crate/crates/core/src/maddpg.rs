//! Multi-agent deterministic-policy-gradient learning with centralized
//! critics and role-based per-agent rewards.
//!
//! Every agent owns a decentralized actor (own observation in, 2D action out)
//! and a centralized critic over the joint observations and actions of all
//! agents. Training interleaves environment steps with off-policy updates
//! from a shared replay buffer: one-step TD targets through the target
//! networks, mean-squared critic regression, deterministic policy gradients
//! through the live critic, and soft target updates. Execution is fully
//! decentralized: action selection reads only the agent's own observation.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{self, Role, WorldConfig};
use crate::error::{ConfigError, TrainError};
use crate::metrics::{self, EpisodeAggregate, EpisodeLog, StepRow};
use crate::neural::{Mlp, Optimizer, OutputActivation};
use crate::rewards::{compute_all_rewards, RewardConfig};

pub mod checkpoint;

/// One replay-buffer element: joint observations, joint actions, per-agent
/// rewards, and the next joint observations. Rewards are per-agent because
/// the role-based reward functions differ across agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<[f64; 2]>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<Vec<f64>>,
}

impl Transition {
    fn is_finite(&self) -> bool {
        self.obs.iter().chain(self.next_obs.iter()).all(|o| o.iter().all(|x| x.is_finite()))
            && self.actions.iter().all(|a| a[0].is_finite() && a[1].is_finite())
            && self.rewards.iter().all(|r| r.is_finite())
    }
}

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    n_agents: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, n_agents: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        ReplayBuffer {
            capacity,
            n_agents,
            storage: Vec::new(),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// FIFO push: once full, the oldest transition is overwritten.
    pub fn push(&mut self, t: Transition) -> Result<(), TrainError> {
        let arity_ok = t.obs.len() == self.n_agents
            && t.actions.len() == self.n_agents
            && t.rewards.len() == self.n_agents
            && t.next_obs.len() == self.n_agents;
        if !arity_ok {
            return Err(TrainError::TransitionArity {
                expected: self.n_agents,
                got: t.obs.len(),
            });
        }
        if self.storage.len() == self.capacity {
            self.storage[self.cursor] = t;
        } else {
            self.storage.push(t);
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Uniform sample with replacement; deterministic given the RNG state.
    pub fn sample<'a>(
        &'a self,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<&'a Transition>, TrainError> {
        if self.storage.len() < k {
            return Err(TrainError::BufferUnderfull {
                size: self.storage.len(),
                requested: k,
            });
        }
        Ok((0..k)
            .map(|_| &self.storage[rng.gen_range(0..self.storage.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    pub(crate) fn cursor(&self) -> usize {
        self.cursor
    }

    pub(crate) fn restore(
        capacity: usize,
        n_agents: usize,
        storage: Vec<Transition>,
        cursor: usize,
    ) -> ReplayBuffer {
        ReplayBuffer {
            capacity,
            n_agents,
            storage,
            cursor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub seed: u64,
    /// Discount factor, in (0, 1].
    pub gamma: f64,
    /// Soft target-update coefficient, in (0, 1].
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Run one update round (all agents) every this many environment steps.
    pub update_every: usize,
    /// Gaussian action-noise std decays linearly from `noise_std_initial` to
    /// `noise_std_final` over the first half of training, then stays flat.
    pub noise_std_initial: f64,
    pub noise_std_final: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden_dim: usize,
    pub optimizer: OptimizerKind,
    /// Write a resumable checkpoint every this many episodes (0 = final only).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 3000,
            seed: 0,
            gamma: 0.95,
            tau: 0.01,
            batch_size: 1024,
            buffer_capacity: 1_000_000,
            update_every: 100,
            noise_std_initial: 0.3,
            noise_std_final: 0.05,
            actor_lr: 0.01,
            critic_lr: 0.01,
            hidden_dim: 64,
            optimizer: OptimizerKind::Adam,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ConfigError::new("training.gamma", "must lie in (0, 1]"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(ConfigError::new("training.tau", "must lie in (0, 1]"));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::new("training.batch_size", "must be >= 1"));
        }
        if self.batch_size > self.buffer_capacity {
            return Err(ConfigError::new(
                "training.batch_size",
                "must not exceed buffer_capacity",
            ));
        }
        if self.update_every == 0 {
            return Err(ConfigError::new("training.update_every", "must be >= 1"));
        }
        if self.hidden_dim == 0 {
            return Err(ConfigError::new("training.hidden_dim", "must be >= 1"));
        }
        for (key, v) in [
            ("training.actor_lr", self.actor_lr),
            ("training.critic_lr", self.critic_lr),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(key, "must be a positive finite number"));
            }
        }
        for (key, v) in [
            ("training.noise_std_initial", self.noise_std_initial),
            ("training.noise_std_final", self.noise_std_final),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(key, "must be >= 0"));
            }
        }
        Ok(())
    }

    /// Exploration noise std for a given episode index.
    pub fn noise_std_at(&self, episode: usize) -> f64 {
        let half = self.episodes / 2;
        if half == 0 || episode >= half {
            return self.noise_std_final;
        }
        let frac = episode as f64 / half as f64;
        self.noise_std_initial + (self.noise_std_final - self.noise_std_initial) * frac
    }
}

/// One agent's learning state: live and target actor/critic plus optimizers.
#[derive(Debug, Clone)]
pub struct AgentLearner {
    pub role: Role,
    pub actor: Mlp,
    pub target_actor: Mlp,
    pub critic: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: Optimizer,
    pub critic_opt: Optimizer,
}

impl AgentLearner {
    fn new(
        role: Role,
        obs_len: usize,
        critic_input_len: usize,
        cfg: &TrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> AgentLearner {
        let h = cfg.hidden_dim;
        let actor = Mlp::xavier_init(&[obs_len, h, h, 2], OutputActivation::Tanh, rng);
        let critic = Mlp::xavier_init(
            &[critic_input_len, h, h, 1],
            OutputActivation::Identity,
            rng,
        );
        let make_opt = |net: &Mlp, lr: f64| match cfg.optimizer {
            OptimizerKind::Adam => Optimizer::adam(net, lr),
            OptimizerKind::Sgd => Optimizer::sgd(lr),
        };
        let actor_opt = make_opt(&actor, cfg.actor_lr);
        let critic_opt = make_opt(&critic, cfg.critic_lr);
        AgentLearner {
            role,
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            actor_opt,
            critic_opt,
        }
    }

    /// Soft-update both target networks toward their live counterparts.
    pub fn soft_update_targets(&mut self, tau: f64) -> Result<(), TrainError> {
        soft_update(&self.actor, &mut self.target_actor, tau)?;
        soft_update(&self.critic, &mut self.target_critic, tau)
    }
}

/// Build one learner per agent. The critic input width is the CTDE contract:
/// the sum of all observation lengths plus two action components per agent.
pub fn build_learners(
    world: &WorldConfig,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<AgentLearner> {
    let n = world.n_agents();
    let obs_len = world.observation_len();
    let critic_input_len = n * obs_len + 2 * n;
    let learners: Vec<AgentLearner> = (0..n)
        .map(|id| AgentLearner::new(world.role_of(id), obs_len, critic_input_len, cfg, rng))
        .collect();
    for l in &learners {
        assert_eq!(l.critic.input_len(), n * obs_len + 2 * n);
        assert_eq!(l.actor.input_len(), obs_len);
    }
    learners
}

/// Concatenate joint observations then joint actions into one critic input.
pub fn critic_input(obs: &[Vec<f64>], actions: &[[f64; 2]]) -> Vec<f64> {
    let total: usize = obs.iter().map(Vec::len).sum::<usize>() + 2 * actions.len();
    let mut v = Vec::with_capacity(total);
    for o in obs {
        v.extend_from_slice(o);
    }
    for a in actions {
        v.extend_from_slice(a);
    }
    v
}

/// target <- tau * live + (1 - tau) * target, elementwise, exactly.
pub fn soft_update(live: &Mlp, target: &mut Mlp, tau: f64) -> Result<(), TrainError> {
    if !live.same_shape(target) {
        return Err(TrainError::ShapeMismatch);
    }
    for (lw, tw) in live.weights.iter().zip(&mut target.weights) {
        for (l, t) in lw.iter().zip(tw.iter_mut()) {
            *t = tau * l + (1.0 - tau) * *t;
        }
    }
    for (lb, tb) in live.biases.iter().zip(&mut target.biases) {
        for (l, t) in lb.iter().zip(tb.iter_mut()) {
            *t = tau * l + (1.0 - tau) * *t;
        }
    }
    Ok(())
}

/// Decentralized action selection: each agent's action is a pure function of
/// its own observation, plus optional exploration noise, clipped to [-1, 1].
/// With `noise_std == 0` the RNG is never touched.
pub fn select_actions(
    learners: &[AgentLearner],
    joint_obs: &[Vec<f64>],
    noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[f64; 2]>, TrainError> {
    if learners.len() != joint_obs.len() {
        return Err(TrainError::TransitionArity {
            expected: learners.len(),
            got: joint_obs.len(),
        });
    }
    let noise = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).expect("validated noise std"))
    } else {
        None
    };
    let mut actions = Vec::with_capacity(learners.len());
    for (learner, obs) in learners.iter().zip(joint_obs) {
        let out = learner.actor.infer(obs)?;
        let mut a = [out[0], out[1]];
        if let Some(n) = &noise {
            a[0] += n.sample(rng);
            a[1] += n.sample(rng);
        }
        actions.push([a[0].clamp(-1.0, 1.0), a[1].clamp(-1.0, 1.0)]);
    }
    Ok(actions)
}

/// One-step TD targets for `agent`: next joint actions come from every
/// agent's TARGET actor on its own next observation, the bootstrap value from
/// `agent`'s TARGET critic. Episodes are fixed-length time-outs, so there is
/// no terminal masking.
pub fn td_targets(
    agent: usize,
    batch: &[&Transition],
    learners: &[AgentLearner],
    gamma: f64,
) -> Result<Vec<f64>, TrainError> {
    let mut targets = Vec::with_capacity(batch.len());
    let mut next_actions: Vec<[f64; 2]> = vec![[0.0, 0.0]; learners.len()];
    for t in batch {
        for (k, learner) in learners.iter().enumerate() {
            let a = learner.target_actor.infer(&t.next_obs[k])?;
            next_actions[k] = [a[0], a[1]];
        }
        let input = critic_input(&t.next_obs, &next_actions);
        let q = learners[agent].target_critic.infer(&input)?;
        targets.push(t.rewards[agent] + gamma * q[0]);
    }
    Ok(targets)
}

/// Minimize the mean-squared TD error of the live critic over the batch with
/// one optimizer step. Returns the pre-step loss.
pub fn critic_update(
    learner: &mut AgentLearner,
    batch: &[&Transition],
    targets: &[f64],
) -> Result<f64, TrainError> {
    let k = batch.len();
    assert_eq!(targets.len(), k);
    let mut grads = crate::neural::Gradients::zeros_like(&learner.critic);
    let mut loss = 0.0;
    for (t, &y) in batch.iter().zip(targets) {
        let input = critic_input(&t.obs, &t.actions);
        let (q, cache) = learner.critic.forward(&input)?;
        let err = q[0] - y;
        loss += err * err;
        learner
            .critic
            .backward_accumulate(&cache, &[2.0 * err / k as f64], &mut grads)?;
    }
    loss /= k as f64;
    if !loss.is_finite() {
        return Err(TrainError::Neural(
            crate::error::NeuralError::NonFiniteGradient,
        ));
    }
    learner.critic_opt.step(&mut learner.critic, &grads)?;
    Ok(loss)
}

/// Gradient of the mean critic value with respect to `agent`'s actor
/// parameters, holding the other agents' actions at their recorded batch
/// values. Returns the gradient and the mean Q estimate.
pub fn actor_gradient(
    learner: &AgentLearner,
    agent: usize,
    batch: &[&Transition],
) -> Result<(crate::neural::Gradients, f64), TrainError> {
    let k = batch.len();
    let mut grads = crate::neural::Gradients::zeros_like(&learner.actor);
    let mut mean_q = 0.0;
    let inv_k = 1.0 / k as f64;
    for t in batch {
        let (a_i, actor_cache) = learner.actor.forward(&t.obs[agent])?;
        let mut actions = t.actions.clone();
        actions[agent] = [a_i[0], a_i[1]];
        let input = critic_input(&t.obs, &actions);
        let (q, critic_cache) = learner.critic.forward(&input)?;
        mean_q += q[0] * inv_k;
        let dinput = learner.critic.input_gradient(&critic_cache, &[inv_k])?;
        let obs_total: usize = t.obs.iter().map(Vec::len).sum();
        let da = &dinput[obs_total + 2 * agent..obs_total + 2 * agent + 2];
        learner
            .actor
            .backward_accumulate(&actor_cache, da, &mut grads)?;
    }
    Ok((grads, mean_q))
}

/// Ascend the critic through the deterministic policy gradient: one optimizer
/// step on the actor only (the critic is left untouched). Returns the
/// pre-step mean Q objective estimate.
pub fn actor_update(
    learner: &mut AgentLearner,
    agent: usize,
    batch: &[&Transition],
) -> Result<f64, TrainError> {
    let (mut grads, mean_q) = actor_gradient(learner, agent, batch)?;
    if !mean_q.is_finite() {
        return Err(TrainError::Neural(
            crate::error::NeuralError::NonFiniteGradient,
        ));
    }
    grads.scale(-1.0);
    learner.actor_opt.step(&mut learner.actor, &grads)?;
    Ok(mean_q)
}

/// Receives each finished episode's full log and aggregate row.
pub trait EpisodeSink {
    fn on_episode(&mut self, log: &EpisodeLog, aggregate: &EpisodeAggregate)
        -> std::io::Result<()>;
}

/// Sink that retains everything in memory (tests, evaluation analysis).
#[derive(Default)]
pub struct CollectSink {
    pub logs: Vec<EpisodeLog>,
    pub aggregates: Vec<EpisodeAggregate>,
}

impl EpisodeSink for CollectSink {
    fn on_episode(
        &mut self,
        log: &EpisodeLog,
        aggregate: &EpisodeAggregate,
    ) -> std::io::Result<()> {
        self.logs.push(log.clone());
        self.aggregates.push(*aggregate);
        Ok(())
    }
}

/// Per-episode progress report for CLI output.
pub struct ProgressEvent<'a> {
    pub episode: usize,
    pub noise_std: f64,
    /// Mean critic loss over this episode's update rounds; NaN if none ran.
    pub mean_critic_loss: f64,
    /// Mean actor objective (estimated Q) over this episode's update rounds.
    pub mean_actor_objective: f64,
    pub aggregate: &'a EpisodeAggregate,
}

/// Optional outputs of a training run.
pub struct RunHooks<'a> {
    pub sink: Option<&'a mut dyn EpisodeSink>,
    pub progress: Option<&'a mut dyn FnMut(&ProgressEvent)>,
    /// Directory that receives `ep_XXXXXX` checkpoint subdirectories.
    pub checkpoint_dir: Option<&'a Path>,
}

impl<'a> RunHooks<'a> {
    pub fn none() -> RunHooks<'static> {
        RunHooks {
            sink: None,
            progress: None,
            checkpoint_dir: None,
        }
    }

    pub fn with_sink(sink: &'a mut dyn EpisodeSink) -> RunHooks<'a> {
        RunHooks {
            sink: Some(sink),
            progress: None,
            checkpoint_dir: None,
        }
    }
}

/// A training run: environment, reward policy, learners, replay buffer, and
/// the single RNG that drives every stochastic choice. One `Trainer` is
/// sequential and deterministic; independent runs share nothing.
pub struct Trainer {
    world: WorldConfig,
    rewards: RewardConfig,
    cfg: TrainConfig,
    pub learners: Vec<AgentLearner>,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    next_episode: usize,
    global_step: u64,
}

impl Trainer {
    pub fn new(
        world: WorldConfig,
        rewards: RewardConfig,
        cfg: TrainConfig,
    ) -> Result<Trainer, TrainError> {
        world.validate().map_err(TrainError::Config)?;
        rewards.validate().map_err(TrainError::Config)?;
        cfg.validate().map_err(TrainError::Config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let learners = build_learners(&world, &cfg, &mut rng);
        let buffer = ReplayBuffer::new(cfg.buffer_capacity, world.n_agents());
        Ok(Trainer {
            world,
            rewards,
            cfg,
            learners,
            buffer,
            rng,
            next_episode: 0,
            global_step: 0,
        })
    }

    pub fn world(&self) -> &WorldConfig {
        &self.world
    }

    pub fn rewards(&self) -> &RewardConfig {
        &self.rewards
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn next_episode(&self) -> usize {
        self.next_episode
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// Extend (or shrink) the episode target, e.g. when resuming with a new
    /// config. The target cannot move below the episodes already trained.
    pub fn set_episodes(&mut self, episodes: usize) -> Result<(), TrainError> {
        if episodes < self.next_episode {
            return Err(TrainError::Config(ConfigError::new(
                "training.episodes",
                format!(
                    "target {} is below the {} episodes already trained",
                    episodes, self.next_episode
                ),
            )));
        }
        self.cfg.episodes = episodes;
        Ok(())
    }

    /// Run episodes `next_episode..episodes`. Returns the aggregates of the
    /// episodes run by this call. A final checkpoint is always written when a
    /// checkpoint directory is provided.
    pub fn run(&mut self, hooks: &mut RunHooks) -> Result<Vec<EpisodeAggregate>, TrainError> {
        let mut aggregates = Vec::new();
        while self.next_episode < self.cfg.episodes {
            let episode = self.next_episode;
            let (log, aggregate, losses) = self.run_training_episode(episode)?;
            if let Some(sink) = hooks.sink.as_deref_mut() {
                sink.on_episode(&log, &aggregate).map_err(TrainError::Sink)?;
            }
            if let Some(progress) = hooks.progress.as_deref_mut() {
                progress(&ProgressEvent {
                    episode,
                    noise_std: self.cfg.noise_std_at(episode),
                    mean_critic_loss: losses.0,
                    mean_actor_objective: losses.1,
                    aggregate: &aggregate,
                });
            }
            aggregates.push(aggregate);
            self.next_episode += 1;
            if let Some(dir) = hooks.checkpoint_dir {
                let due = self.cfg.checkpoint_every > 0
                    && self.next_episode % self.cfg.checkpoint_every == 0
                    && self.next_episode < self.cfg.episodes;
                if due {
                    self.write_checkpoint_under(dir)?;
                }
            }
        }
        if let Some(dir) = hooks.checkpoint_dir {
            self.write_checkpoint_under(dir)?;
        }
        Ok(aggregates)
    }

    fn write_checkpoint_under(&self, dir: &Path) -> Result<(), TrainError> {
        let sub = dir.join(format!("ep_{:06}", self.next_episode));
        self.write_checkpoint(&sub)
    }

    /// Write a fully resumable checkpoint (networks, optimizer states, replay
    /// buffer, RNG state, config snapshot) into `dir`.
    pub fn write_checkpoint(&self, dir: &Path) -> Result<(), TrainError> {
        checkpoint::save(
            dir,
            &checkpoint::CheckpointManifest {
                format_version: checkpoint::FORMAT_VERSION,
                world: self.world.clone(),
                rewards: self.rewards.clone(),
                training: self.cfg.clone(),
                next_episode: self.next_episode,
                rng: checkpoint::RngState::capture(&self.rng),
            },
            &self.learners,
            &self.buffer,
        )
    }

    /// Restore a trainer from a checkpoint directory, bit-exactly.
    pub fn resume(dir: &Path) -> Result<Trainer, TrainError> {
        let (manifest, learners, buffer) = checkpoint::load(dir)?;
        manifest.world.validate().map_err(TrainError::Config)?;
        manifest.rewards.validate().map_err(TrainError::Config)?;
        manifest.training.validate().map_err(TrainError::Config)?;
        if learners.len() != manifest.world.n_agents() {
            return Err(TrainError::Checkpoint(format!(
                "checkpoint has {} agents, world expects {}",
                learners.len(),
                manifest.world.n_agents()
            )));
        }
        let global_step = manifest.next_episode as u64 * manifest.world.episode_length as u64;
        Ok(Trainer {
            rng: manifest.rng.restore(),
            world: manifest.world,
            rewards: manifest.rewards,
            cfg: manifest.training,
            learners,
            buffer,
            next_episode: manifest.next_episode,
            global_step,
        })
    }

    fn run_training_episode(
        &mut self,
        episode: usize,
    ) -> Result<(EpisodeLog, EpisodeAggregate, (f64, f64)), TrainError> {
        let noise_std = self.cfg.noise_std_at(episode);
        let ep_seed = self.rng.gen::<u64>();
        let (mut state, obs) = env::reset(&self.world, ep_seed)?;
        let mut flat_obs: Vec<Vec<f64>> = obs.iter().map(|o| o.flatten()).collect();
        let n_agents = state.agents.len();
        let mut rows = Vec::with_capacity(self.world.episode_length * n_agents);
        let mut critic_losses = Vec::new();
        let mut actor_objectives = Vec::new();

        for step_idx in 0..self.world.episode_length {
            let actions = select_actions(&self.learners, &flat_obs, noise_std, &mut self.rng)?;
            let (next_state, next_obs, info) = env::step(&self.world, &state, &actions)?;
            let breakdowns = compute_all_rewards(&self.world, &next_state, &info, &self.rewards)?;
            let next_flat: Vec<Vec<f64>> = next_obs.iter().map(|o| o.flatten()).collect();
            let transition = Transition {
                obs: flat_obs,
                actions: actions.clone(),
                rewards: breakdowns.iter().map(|b| b.total).collect(),
                next_obs: next_flat.clone(),
            };
            if !transition.is_finite() {
                return Err(TrainError::AtStep {
                    episode,
                    step: step_idx,
                    agent: 0,
                    source: Box::new(TrainError::Checkpoint(
                        "non-finite transition values".into(),
                    )),
                });
            }
            self.buffer.push(transition)?;
            for (agent, breakdown) in next_state.agents.iter().zip(&breakdowns) {
                rows.push(StepRow {
                    step: step_idx,
                    agent_id: agent.id,
                    role: agent.role,
                    position: agent.position,
                    velocity: agent.velocity,
                    reward: *breakdown,
                });
            }
            flat_obs = next_flat;
            state = next_state;
            self.global_step += 1;

            if self.global_step % self.cfg.update_every as u64 == 0
                && self.buffer.len() >= self.cfg.batch_size
            {
                for agent in 0..n_agents {
                    let annotate = |e: TrainError| TrainError::AtStep {
                        episode,
                        step: step_idx,
                        agent,
                        source: Box::new(e),
                    };
                    let batch = self.buffer.sample(self.cfg.batch_size, &mut self.rng)?;
                    let targets = td_targets(agent, &batch, &self.learners, self.cfg.gamma)
                        .map_err(annotate)?;
                    let loss = critic_update(&mut self.learners[agent], &batch, &targets)
                        .map_err(annotate)?;
                    let objective =
                        actor_update(&mut self.learners[agent], agent, &batch).map_err(annotate)?;
                    self.learners[agent].soft_update_targets(self.cfg.tau)?;
                    critic_losses.push(loss);
                    actor_objectives.push(objective);
                }
            }
        }

        let log = EpisodeLog {
            episode,
            obstacles: state.obstacles.clone(),
            rows,
        };
        let aggregate =
            metrics::aggregate_from_rows(&log, self.world.sensor_range, self.world.half_extent)?;
        let mean = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        Ok((
            log,
            aggregate,
            (mean(&critic_losses), mean(&actor_objectives)),
        ))
    }
}

/// Noise-free evaluation rollouts of fixed policies. Never mutates the
/// learners; per-episode worlds derive from `seed`.
pub fn evaluate(
    world: &WorldConfig,
    rewards: &RewardConfig,
    learners: &[AgentLearner],
    episodes: usize,
    seed: u64,
    sink: Option<&mut dyn EpisodeSink>,
) -> Result<Vec<EpisodeAggregate>, TrainError> {
    world.validate().map_err(TrainError::Config)?;
    rewards.validate().map_err(TrainError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sink = sink;
    let mut aggregates = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let ep_seed = rng.gen::<u64>();
        let (mut state, obs) = env::reset(world, ep_seed)?;
        let mut flat_obs: Vec<Vec<f64>> = obs.iter().map(|o| o.flatten()).collect();
        let mut rows = Vec::with_capacity(world.episode_length * state.agents.len());
        for step_idx in 0..world.episode_length {
            let actions = select_actions(learners, &flat_obs, 0.0, &mut rng)?;
            let (next_state, next_obs, info) = env::step(world, &state, &actions)?;
            let breakdowns = compute_all_rewards(world, &next_state, &info, rewards)?;
            for (agent, breakdown) in next_state.agents.iter().zip(&breakdowns) {
                rows.push(StepRow {
                    step: step_idx,
                    agent_id: agent.id,
                    role: agent.role,
                    position: agent.position,
                    velocity: agent.velocity,
                    reward: *breakdown,
                });
            }
            flat_obs = next_obs.iter().map(|o| o.flatten()).collect();
            state = next_state;
        }
        let log = EpisodeLog {
            episode,
            obstacles: state.obstacles.clone(),
            rows,
        };
        let aggregate = metrics::aggregate_from_rows(&log, world.sensor_range, world.half_extent)?;
        if let Some(s) = sink.as_deref_mut() {
            s.on_episode(&log, &aggregate).map_err(TrainError::Sink)?;
        }
        aggregates.push(aggregate);
    }
    Ok(aggregates)
}
