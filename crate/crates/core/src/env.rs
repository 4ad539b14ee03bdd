//! Bounded 2D particle world: agent dynamics, obstacle placement, observation
//! construction, collision detection, and the episode lifecycle.
//!
//! The world is deliberately simple: double-integrator point agents with
//! per-step velocity damping, a speed cap per role, and circular static
//! obstacles. There is no hard wall; containment is handled by the bounding
//! reward, so positions may leave the arena transiently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, EnvError};
use crate::vec2::Vec2;

/// Attempts allowed when rejection-sampling one entity's spawn position.
pub const SPAWN_ATTEMPT_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pursuer,
    Scout,
    Evader,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Pursuer => "pursuer",
            Role::Scout => "scout",
            Role::Evader => "evader",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "pursuer" => Some(Role::Pursuer),
            "scout" => Some(Role::Scout),
            "evader" => Some(Role::Evader),
            _ => None,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static world parameters. Agents are ordered pursuers, then scouts, then
/// evaders; agent ids index into that ordering everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    /// Arena is the square `[-half_extent, half_extent]^2`.
    pub half_extent: f64,
    pub n_pursuers: usize,
    pub n_scouts: usize,
    pub n_evaders: usize,
    pub pursuer_radius: f64,
    pub scout_radius: f64,
    pub evader_radius: f64,
    pub pursuer_max_speed: f64,
    /// Evader max speed = pursuer max speed * this factor.
    pub evader_speed_factor: f64,
    pub n_obstacles: usize,
    pub obstacle_radius_range: (f64, f64),
    /// Acceleration per unit action component, m/s^2.
    pub accel_gain: f64,
    pub dt: f64,
    pub episode_length: usize,
    /// Per-step velocity retention: v <- damping * v + accel_gain * a * dt.
    pub damping: f64,
    /// Detection radius used by coverage metrics and the pursuit-success threshold.
    pub sensor_range: f64,
    /// Default seed for standalone resets; training derives per-episode seeds.
    pub rng_seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            half_extent: 3.0,
            n_pursuers: 5,
            n_scouts: 0,
            n_evaders: 2,
            pursuer_radius: 0.075,
            scout_radius: 0.075,
            evader_radius: 0.05,
            pursuer_max_speed: 1.0,
            evader_speed_factor: 1.3,
            n_obstacles: 3,
            obstacle_radius_range: (0.25, 0.5),
            accel_gain: 5.0,
            dt: 0.1,
            episode_length: 50,
            damping: 0.75,
            sensor_range: 0.5,
            rng_seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn n_agents(&self) -> usize {
        self.n_pursuers + self.n_scouts + self.n_evaders
    }

    pub fn role_of(&self, agent_id: usize) -> Role {
        if agent_id < self.n_pursuers {
            Role::Pursuer
        } else if agent_id < self.n_pursuers + self.n_scouts {
            Role::Scout
        } else {
            Role::Evader
        }
    }

    pub fn radius_of(&self, role: Role) -> f64 {
        match role {
            Role::Pursuer => self.pursuer_radius,
            Role::Scout => self.scout_radius,
            Role::Evader => self.evader_radius,
        }
    }

    pub fn max_speed_of(&self, role: Role) -> f64 {
        match role {
            Role::Pursuer | Role::Scout => self.pursuer_max_speed,
            Role::Evader => self.pursuer_max_speed * self.evader_speed_factor,
        }
    }

    /// Flattened observation length: own velocity and position, one offset per
    /// obstacle, one offset per other agent, one velocity offset per evader.
    pub fn observation_len(&self) -> usize {
        4 + 2 * self.n_obstacles + 2 * (self.n_agents() - 1) + 2 * self.n_evaders
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_evaders == 0 {
            return Err(ConfigError::new("world.n_evaders", "must be at least 1"));
        }
        if self.n_pursuers < self.n_evaders {
            return Err(ConfigError::new(
                "world.n_pursuers",
                format!(
                    "must be >= n_evaders (at least one pursuer per evader), got {} < {}",
                    self.n_pursuers, self.n_evaders
                ),
            ));
        }
        for (key, r) in [
            ("world.pursuer_radius", self.pursuer_radius),
            ("world.scout_radius", self.scout_radius),
            ("world.evader_radius", self.evader_radius),
        ] {
            if !(r > 0.0) {
                return Err(ConfigError::new(key, "must be > 0"));
            }
        }
        let max_radius = self
            .pursuer_radius
            .max(self.scout_radius)
            .max(self.evader_radius);
        if !(self.half_extent > max_radius) {
            return Err(ConfigError::new(
                "world.half_extent",
                "must exceed the largest agent radius",
            ));
        }
        if !(self.evader_speed_factor > 0.0) {
            return Err(ConfigError::new("world.evader_speed_factor", "must be > 0"));
        }
        if !(self.pursuer_max_speed > 0.0) {
            return Err(ConfigError::new("world.pursuer_max_speed", "must be > 0"));
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::new("world.dt", "must be > 0"));
        }
        if self.episode_length == 0 {
            return Err(ConfigError::new("world.episode_length", "must be >= 1"));
        }
        if !(self.accel_gain > 0.0) {
            return Err(ConfigError::new("world.accel_gain", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(ConfigError::new("world.damping", "must lie in [0, 1]"));
        }
        if !(self.sensor_range > 0.0) {
            return Err(ConfigError::new("world.sensor_range", "must be > 0"));
        }
        let (lo, hi) = self.obstacle_radius_range;
        if self.n_obstacles > 0 {
            if !(lo > 0.0 && hi >= lo) {
                return Err(ConfigError::new(
                    "world.obstacle_radius_range",
                    "must satisfy 0 < min <= max",
                ));
            }
            if !(self.half_extent > hi) {
                return Err(ConfigError::new(
                    "world.obstacle_radius_range",
                    "largest obstacle must fit inside the arena",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub role: Role,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

/// Ground-truth world state. All mutation goes through `reset`/`step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub obstacles: Vec<Obstacle>,
    pub step_index: usize,
}

/// One agent's view of the world. Relative entries are `other - self`, ordered
/// by id so the layout is stable for a given `WorldConfig`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub own_velocity: Vec2,
    pub own_position: Vec2,
    pub obstacle_offsets: Vec<Vec2>,
    pub agent_offsets: Vec<Vec2>,
    /// Velocity offsets of every evader (zero entry for the observer itself).
    pub evader_velocity_offsets: Vec<Vec2>,
}

impl Observation {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(
            4 + 2 * (self.obstacle_offsets.len()
                + self.agent_offsets.len()
                + self.evader_velocity_offsets.len()),
        );
        v.extend([
            self.own_velocity.x,
            self.own_velocity.y,
            self.own_position.x,
            self.own_position.y,
        ]);
        for block in [
            &self.obstacle_offsets,
            &self.agent_offsets,
            &self.evader_velocity_offsets,
        ] {
            for p in block.iter() {
                v.push(p.x);
                v.push(p.y);
            }
        }
        v
    }
}

/// Pairwise distances and collision flags for one step, consumed by rewards
/// and metrics. `collided(i, j)` is symmetric and false on the diagonal.
#[derive(Debug, Clone)]
pub struct StepInfo {
    n: usize,
    distances: Vec<f64>,
    collisions: Vec<bool>,
}

impl StepInfo {
    pub fn from_state(state: &WorldState) -> StepInfo {
        let n = state.agents.len();
        let mut distances = vec![0.0; n * n];
        let mut collisions = vec![false; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = state.agents[i].position.distance(state.agents[j].position);
                let hit = d <= state.agents[i].radius + state.agents[j].radius;
                distances[i * n + j] = d;
                distances[j * n + i] = d;
                collisions[i * n + j] = hit;
                collisions[j * n + i] = hit;
            }
        }
        StepInfo {
            n,
            distances,
            collisions,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n + j]
    }

    pub fn collided(&self, i: usize, j: usize) -> bool {
        self.collisions[i * self.n + j]
    }
}

fn sample_in_square(rng: &mut ChaCha8Rng, margin: f64, half_extent: f64) -> Vec2 {
    let lo = -(half_extent - margin);
    let hi = half_extent - margin;
    Vec2::new(rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))
}

/// Build a fresh world. Identical seeds produce bit-identical worlds. Agent
/// spawns are rejection-sampled so nothing overlaps at reset; an over-dense
/// configuration fails once the attempt budget is exhausted.
pub fn reset(cfg: &WorldConfig, seed: u64) -> Result<(WorldState, Vec<Observation>), EnvError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut obstacles = Vec::with_capacity(cfg.n_obstacles);
    for _ in 0..cfg.n_obstacles {
        let (lo, hi) = cfg.obstacle_radius_range;
        let radius = rng.gen_range(lo..=hi);
        let center = sample_in_square(&mut rng, radius, cfg.half_extent);
        obstacles.push(Obstacle { center, radius });
    }

    let mut agents: Vec<AgentState> = Vec::with_capacity(cfg.n_agents());
    for id in 0..cfg.n_agents() {
        let role = cfg.role_of(id);
        let radius = cfg.radius_of(role);
        let mut placed = false;
        for _ in 0..SPAWN_ATTEMPT_BUDGET {
            let pos = sample_in_square(&mut rng, radius, cfg.half_extent);
            let clear_of_agents = agents
                .iter()
                .all(|a| a.position.distance(pos) > a.radius + radius);
            let clear_of_obstacles = obstacles
                .iter()
                .all(|o| o.center.distance(pos) > o.radius + radius);
            if clear_of_agents && clear_of_obstacles {
                agents.push(AgentState {
                    id,
                    role,
                    position: pos,
                    velocity: Vec2::ZERO,
                    radius,
                    max_speed: cfg.max_speed_of(role),
                });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(EnvError::SpawnBudgetExceeded {
                entity: format!("agent {id} ({})", cfg.role_of(id)),
                budget: SPAWN_ATTEMPT_BUDGET,
            });
        }
    }

    let state = WorldState {
        agents,
        obstacles,
        step_index: 0,
    };
    let obs = joint_observations(&state);
    Ok((state, obs))
}

/// Advance the world by one step. Actions are clipped to `[-1, 1]^2` and
/// scaled by the acceleration gain; agents overlapping an obstacle are
/// projected back to its surface with the inward velocity component zeroed.
pub fn step(
    cfg: &WorldConfig,
    state: &WorldState,
    actions: &[[f64; 2]],
) -> Result<(WorldState, Vec<Observation>, StepInfo), EnvError> {
    if actions.len() != state.agents.len() {
        return Err(EnvError::ActionArity {
            expected: state.agents.len(),
            got: actions.len(),
        });
    }
    for (i, a) in actions.iter().enumerate() {
        if !(a[0].is_finite() && a[1].is_finite()) {
            return Err(EnvError::NonFiniteAction { agent: i });
        }
    }

    let mut next = state.clone();
    for (agent, action) in next.agents.iter_mut().zip(actions) {
        let a = Vec2::new(action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0));
        let mut v = agent.velocity * cfg.damping + a * (cfg.accel_gain * cfg.dt);
        v = v.clamp_norm(agent.max_speed);
        let mut p = agent.position + v * cfg.dt;

        for obstacle in &state.obstacles {
            let offset = p - obstacle.center;
            let dist = offset.norm();
            let contact = agent.radius + obstacle.radius;
            if dist < contact {
                let normal = if dist > 0.0 {
                    offset * (1.0 / dist)
                } else {
                    Vec2::new(1.0, 0.0)
                };
                p = obstacle.center + normal * contact;
                let inward = v.dot(normal);
                if inward < 0.0 {
                    v = v - normal * inward;
                }
            }
        }

        agent.velocity = v;
        agent.position = p;
    }
    next.step_index += 1;

    let info = StepInfo::from_state(&next);
    let obs = joint_observations(&next);
    Ok((next, obs, info))
}

pub fn observe(state: &WorldState, agent_id: usize) -> Result<Observation, EnvError> {
    if agent_id >= state.agents.len() {
        return Err(EnvError::BadAgentId {
            agent: agent_id,
            n_agents: state.agents.len(),
        });
    }
    let me = &state.agents[agent_id];
    let obstacle_offsets = state
        .obstacles
        .iter()
        .map(|o| o.center - me.position)
        .collect();
    let agent_offsets = state
        .agents
        .iter()
        .filter(|a| a.id != agent_id)
        .map(|a| a.position - me.position)
        .collect();
    let evader_velocity_offsets = state
        .agents
        .iter()
        .filter(|a| a.role == Role::Evader)
        .map(|a| a.velocity - me.velocity)
        .collect();
    Ok(Observation {
        own_velocity: me.velocity,
        own_position: me.position,
        obstacle_offsets,
        agent_offsets,
        evader_velocity_offsets,
    })
}

pub fn joint_observations(state: &WorldState) -> Vec<Observation> {
    (0..state.agents.len())
        .map(|id| observe(state, id).expect("agent ids are dense"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> WorldConfig {
        WorldConfig {
            n_pursuers: 2,
            n_scouts: 1,
            n_evaders: 1,
            n_obstacles: 2,
            ..WorldConfig::default()
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = small_cfg();
        let (a, oa) = reset(&cfg, 42).unwrap();
        let (b, ob) = reset(&cfg, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(oa, ob);
        let (c, _) = reset(&cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn no_obstacles_means_empty_block() {
        let cfg = WorldConfig {
            n_obstacles: 0,
            ..small_cfg()
        };
        let (state, obs) = reset(&cfg, 7).unwrap();
        assert!(state.obstacles.is_empty());
        assert!(obs.iter().all(|o| o.obstacle_offsets.is_empty()));
        assert_eq!(obs[0].flatten().len(), cfg.observation_len());
    }

    #[test]
    fn spawn_separation_holds_for_thirteen_agents() {
        // 13 agents in the 6 m arena: exhaustive pairwise scan after reset.
        let cfg = WorldConfig {
            n_pursuers: 6,
            n_scouts: 5,
            n_evaders: 2,
            ..WorldConfig::default()
        };
        for seed in 0..20 {
            let (state, _) = reset(&cfg, seed).unwrap();
            for i in 0..state.agents.len() {
                for j in (i + 1)..state.agents.len() {
                    let (a, b) = (&state.agents[i], &state.agents[j]);
                    assert!(
                        a.position.distance(b.position) > a.radius + b.radius,
                        "agents {i} and {j} overlap at spawn (seed {seed})"
                    );
                }
                for o in &state.obstacles {
                    let a = &state.agents[i];
                    assert!(a.position.distance(o.center) > a.radius + o.radius);
                }
            }
        }
    }

    #[test]
    fn overdense_config_exhausts_spawn_budget() {
        let cfg = WorldConfig {
            n_pursuers: 2,
            n_scouts: 0,
            n_evaders: 1,
            pursuer_radius: 2.5,
            evader_radius: 2.5,
            n_obstacles: 0,
            ..WorldConfig::default()
        };
        match reset(&cfg, 1) {
            Err(EnvError::SpawnBudgetExceeded { .. }) => {}
            other => panic!("expected SpawnBudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn zero_action_from_rest_is_a_fixed_point() {
        let cfg = small_cfg();
        let (state, _) = reset(&cfg, 3).unwrap();
        let actions = vec![[0.0, 0.0]; state.agents.len()];
        let (next, _, _) = step(&cfg, &state, &actions).unwrap();
        for (a, b) in state.agents.iter().zip(&next.agents) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.velocity, b.velocity);
        }
    }

    #[test]
    fn full_throttle_from_rest_matches_update_rule() {
        let cfg = small_cfg();
        let (state, _) = reset(&cfg, 3).unwrap();
        let mut actions = vec![[0.0, 0.0]; state.agents.len()];
        actions[0] = [1.0, 0.0];
        let (next, _, _) = step(&cfg, &state, &actions).unwrap();
        let expected_vx = (cfg.accel_gain * cfg.dt).min(state.agents[0].max_speed);
        assert!((next.agents[0].velocity.x - expected_vx).abs() < 1e-15);
        assert_eq!(next.agents[0].velocity.y, 0.0);
        // Actions outside [-1,1] clip to the same result.
        let mut big = vec![[0.0, 0.0]; state.agents.len()];
        big[0] = [250.0, 0.0];
        let (next_big, _, _) = step(&cfg, &state, &big).unwrap();
        assert_eq!(next.agents[0].velocity, next_big.agents[0].velocity);
    }

    #[test]
    fn collision_flag_at_paper_radii() {
        // Pursuer radius 0.075 m and evader radius 0.05 m collide at 0.10 m.
        let cfg = WorldConfig {
            n_pursuers: 1,
            n_scouts: 0,
            n_evaders: 1,
            n_obstacles: 0,
            ..WorldConfig::default()
        };
        let state = WorldState {
            agents: vec![
                AgentState {
                    id: 0,
                    role: Role::Pursuer,
                    position: Vec2::new(0.0, 0.0),
                    velocity: Vec2::ZERO,
                    radius: 0.075,
                    max_speed: 1.0,
                },
                AgentState {
                    id: 1,
                    role: Role::Evader,
                    position: Vec2::new(0.10, 0.0),
                    velocity: Vec2::ZERO,
                    radius: 0.05,
                    max_speed: 1.3,
                },
            ],
            obstacles: vec![],
            step_index: 0,
        };
        let (_, _, info) = step(&cfg, &state, &[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(info.collided(0, 1));
        assert!(info.collided(1, 0));
        assert!(!info.collided(0, 0));
    }

    #[test]
    fn speed_cap_holds_under_random_actions() {
        let cfg = small_cfg();
        let (mut state, _) = reset(&cfg, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let actions: Vec<[f64; 2]> = (0..state.agents.len())
                .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
                .collect();
            let (next, _, info) = step(&cfg, &state, &actions).unwrap();
            for a in &next.agents {
                assert!(a.velocity.norm() <= a.max_speed);
            }
            // Collision symmetry.
            for i in 0..next.agents.len() {
                for j in 0..next.agents.len() {
                    assert_eq!(info.collided(i, j), info.collided(j, i));
                    assert_eq!(info.distance(i, j), info.distance(j, i));
                }
            }
            state = next;
        }
    }

    #[test]
    fn evader_speed_ratio_is_exact() {
        let cfg = small_cfg();
        let (state, _) = reset(&cfg, 5).unwrap();
        let evader = state.agents.iter().find(|a| a.role == Role::Evader).unwrap();
        let pursuer = state.agents.iter().find(|a| a.role == Role::Pursuer).unwrap();
        assert_eq!(evader.max_speed, pursuer.max_speed * cfg.evader_speed_factor);
    }

    #[test]
    fn observation_layout_and_relative_entries() {
        let cfg = WorldConfig {
            n_pursuers: 1,
            n_scouts: 0,
            n_evaders: 1,
            n_obstacles: 1,
            ..WorldConfig::default()
        };
        let state = WorldState {
            agents: vec![
                AgentState {
                    id: 0,
                    role: Role::Pursuer,
                    position: Vec2::new(0.5, -0.5),
                    velocity: Vec2::new(0.1, 0.2),
                    radius: 0.075,
                    max_speed: 1.0,
                },
                AgentState {
                    id: 1,
                    role: Role::Evader,
                    position: Vec2::new(0.5, -0.5),
                    velocity: Vec2::new(0.0, 0.0),
                    radius: 0.05,
                    max_speed: 1.3,
                },
            ],
            obstacles: vec![Obstacle {
                center: Vec2::new(1.5, 1.5),
                radius: 0.3,
            }],
            step_index: 0,
        };
        let obs = observe(&state, 0).unwrap();
        // Two agents at identical positions: relative position entry is (0,0).
        assert_eq!(obs.agent_offsets, vec![Vec2::ZERO]);
        // Obstacle at self + (1, 2): obstacle block is exactly (1, 2).
        assert_eq!(obs.obstacle_offsets, vec![Vec2::new(1.0, 2.0)]);
        // Evader velocity offset is (other - self).
        assert_eq!(obs.evader_velocity_offsets, vec![Vec2::new(-0.1, -0.2)]);
        assert_eq!(obs.flatten().len(), cfg.observation_len());
    }

    #[test]
    fn observation_order_follows_ids_not_creation() {
        let cfg = WorldConfig {
            n_pursuers: 1,
            n_scouts: 0,
            n_evaders: 1,
            n_obstacles: 2,
            ..WorldConfig::default()
        };
        let agents = vec![
            AgentState {
                id: 0,
                role: Role::Pursuer,
                position: Vec2::ZERO,
                velocity: Vec2::ZERO,
                radius: 0.075,
                max_speed: 1.0,
            },
            AgentState {
                id: 1,
                role: Role::Evader,
                position: Vec2::new(1.0, 0.0),
                velocity: Vec2::ZERO,
                radius: 0.05,
                max_speed: 1.3,
            },
        ];
        let o1 = Obstacle {
            center: Vec2::new(-1.0, 2.0),
            radius: 0.3,
        };
        let o2 = Obstacle {
            center: Vec2::new(2.0, -2.0),
            radius: 0.4,
        };
        // Created in either order, then arranged into the same id slots.
        let created_one_way = vec![o1, o2];
        let created_other_way = {
            let mut v = vec![o2, o1];
            v.swap(0, 1);
            v
        };
        let state_a = WorldState {
            agents: agents.clone(),
            obstacles: created_one_way,
            step_index: 0,
        };
        let state_b = WorldState {
            agents,
            obstacles: created_other_way,
            step_index: 0,
        };
        assert_eq!(observe(&state_a, 0).unwrap(), observe(&state_b, 0).unwrap());
    }

    #[test]
    fn trajectories_are_bit_identical_for_fixed_seed_and_actions() {
        let cfg = small_cfg();
        let run = || {
            let (mut state, _) = reset(&cfg, 77).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(123);
            let mut trace = Vec::new();
            for _ in 0..cfg.episode_length {
                let actions: Vec<[f64; 2]> = (0..state.agents.len())
                    .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
                    .collect();
                let (next, _, _) = step(&cfg, &state, &actions).unwrap();
                trace.extend(next.agents.iter().flat_map(|a| {
                    [
                        a.position.x.to_bits(),
                        a.position.y.to_bits(),
                        a.velocity.x.to_bits(),
                        a.velocity.y.to_bits(),
                    ]
                }));
                state = next;
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_action_is_rejected() {
        let cfg = small_cfg();
        let (state, _) = reset(&cfg, 2).unwrap();
        let mut actions = vec![[0.0, 0.0]; state.agents.len()];
        actions[1] = [f64::NAN, 0.0];
        match step(&cfg, &state, &actions) {
            Err(EnvError::NonFiniteAction { agent: 1 }) => {}
            other => panic!("expected NonFiniteAction, got {other:?}"),
        }
    }

    #[test]
    fn obstacle_contact_projects_to_surface() {
        let cfg = WorldConfig {
            n_pursuers: 1,
            n_scouts: 0,
            n_evaders: 1,
            n_obstacles: 0,
            ..WorldConfig::default()
        };
        let obstacle = Obstacle {
            center: Vec2::new(0.5, 0.0),
            radius: 0.3,
        };
        let state = WorldState {
            agents: vec![
                AgentState {
                    id: 0,
                    role: Role::Pursuer,
                    position: Vec2::new(0.2, 0.0),
                    velocity: Vec2::new(1.0, 0.0),
                    radius: 0.075,
                    max_speed: 1.0,
                },
                AgentState {
                    id: 1,
                    role: Role::Evader,
                    position: Vec2::new(-2.0, 0.0),
                    velocity: Vec2::ZERO,
                    radius: 0.05,
                    max_speed: 1.3,
                },
            ],
            obstacles: vec![obstacle],
            step_index: 0,
        };
        let (next, _, _) = step(&cfg, &state, &[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let a = &next.agents[0];
        let dist = a.position.distance(obstacle.center);
        assert!((dist - (a.radius + obstacle.radius)).abs() < 1e-12);
        // Inward velocity component zeroed: the agent no longer moves toward the center.
        let normal = (a.position - obstacle.center) * (1.0 / dist);
        assert!(a.velocity.dot(normal) >= 0.0);
    }

    #[test]
    fn invalid_configs_name_the_offending_key() {
        let bad = WorldConfig {
            n_pursuers: 1,
            n_evaders: 2,
            ..WorldConfig::default()
        };
        let err = bad.validate().unwrap_err();
        assert_eq!(err.key, "world.n_pursuers");

        let bad = WorldConfig {
            dt: 0.0,
            ..WorldConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().key, "world.dt");
    }
}
