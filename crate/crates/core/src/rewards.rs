//! Role-based reward components and their composition into per-agent scalars.
//!
//! Pursuers earn a catch bonus plus a negative distance-to-target term,
//! evaders are penalized when caught, and scouts optimize exploration by
//! minimizing the largest Voronoi cell over all agent positions. Everyone
//! shares the soft arena-bounding term and the pairwise collision penalty.

use serde::{Deserialize, Serialize};

use crate::env::{Role, StepInfo, WorldConfig, WorldState};
use crate::error::{ConfigError, RewardError};
use crate::geometry::{bounded_voronoi, max_cell_area, VoronoiDiagram};
use crate::vec2::Vec2;

/// How a pursuer's distance term picks its target(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetAssignment {
    /// Pursuer k tracks evader k mod n_evaders (static sub-teams).
    RoundRobin,
    /// Distance to the nearest evader.
    NearestGreedy,
    /// Mean distance over all evaders.
    AverageAllTargets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Cap on the x-term of the bounding penalty.
    pub c1: f64,
    /// Cap on the y-term of the bounding penalty.
    pub c2: f64,
    /// Magnitude of the pairwise collision penalty.
    pub c3: f64,
    /// Pursuer bonus for colliding with an evader.
    pub cr_pursuer: f64,
    /// Evader reward (negative) for being caught.
    pub cr_evader: f64,
    pub target_assignment: TargetAssignment,
    /// All scouts share the single exploration scalar. Only `true` is
    /// supported; the per-scout own-cell variant is deliberately not built.
    pub voronoi_shared: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            c1: 10.0,
            c2: 10.0,
            c3: 10.0,
            cr_pursuer: 20.0,
            cr_evader: -10.0,
            target_assignment: TargetAssignment::RoundRobin,
            voronoi_shared: true,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("rewards.c1", self.c1),
            ("rewards.c2", self.c2),
            ("rewards.c3", self.c3),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::new(key, "must be > 0"));
            }
        }
        if !(self.cr_pursuer > 0.0) {
            return Err(ConfigError::new("rewards.cr_pursuer", "must be > 0"));
        }
        if !(self.cr_evader < 0.0) {
            return Err(ConfigError::new("rewards.cr_evader", "must be < 0"));
        }
        if !self.voronoi_shared {
            return Err(ConfigError::new(
                "rewards.voronoi_shared",
                "only the shared exploration scalar is supported; set to true",
            ));
        }
        Ok(())
    }
}

/// Per-agent reward components for one step. `total` is always the exact sum
/// of the five components; role-inapplicable components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub bounding: f64,
    pub collision: f64,
    pub catch: f64,
    pub distance: f64,
    pub exploration: f64,
    pub total: f64,
}

impl RewardBreakdown {
    fn finalize(mut self) -> RewardBreakdown {
        self.total = self.bounding + self.collision + self.catch + self.distance + self.exploration;
        self
    }
}

/// Soft containment penalty, always <= 0 and steepest outside the arena.
/// For the default 3 m half-extent this is
/// `-min(exp(3|x| - 9), c1) - min(exp(3|y| - 9), c2)`.
pub fn bounding_reward(position: Vec2, c1: f64, c2: f64, half_extent: f64) -> f64 {
    let term = |coord: f64, cap: f64| -> f64 {
        (3.0 * coord.abs() - 3.0 * half_extent).exp().min(cap)
    };
    -term(position.x, c1) - term(position.y, c2)
}

/// Pairwise collision penalty: `-c3` when the distance does not exceed the
/// sum of radii (boundary inclusive), else 0.
pub fn collision_reward(dist: f64, r_i: f64, r_j: f64, c3: f64) -> f64 {
    if dist <= r_i + r_j {
        -c3
    } else {
        0.0
    }
}

fn collision_sum(agent: usize, state: &WorldState, info: &StepInfo, c3: f64) -> f64 {
    let me = &state.agents[agent];
    state
        .agents
        .iter()
        .filter(|other| other.id != agent)
        .map(|other| collision_reward(info.distance(agent, other.id), me.radius, other.radius, c3))
        .sum()
}

fn collided_with_role(agent: usize, state: &WorldState, info: &StepInfo, role: Role) -> bool {
    state
        .agents
        .iter()
        .any(|other| other.id != agent && other.role == role && info.collided(agent, other.id))
}

fn expect_role(agent: usize, state: &WorldState, expected: Role) -> Result<(), RewardError> {
    let actual = state.agents[agent].role;
    if actual != expected {
        return Err(RewardError::RoleMismatch {
            agent,
            expected: expected.as_str(),
            actual: actual.as_str(),
        });
    }
    Ok(())
}

fn distance_term(
    agent: usize,
    state: &WorldState,
    info: &StepInfo,
    assignment: TargetAssignment,
) -> f64 {
    let evaders: Vec<usize> = state
        .agents
        .iter()
        .filter(|a| a.role == Role::Evader)
        .map(|a| a.id)
        .collect();
    if evaders.is_empty() {
        return 0.0;
    }
    match assignment {
        TargetAssignment::RoundRobin => {
            let pursuer_index = state.agents[..agent]
                .iter()
                .filter(|a| a.role == Role::Pursuer)
                .count();
            -info.distance(agent, evaders[pursuer_index % evaders.len()])
        }
        TargetAssignment::NearestGreedy => -evaders
            .iter()
            .map(|&e| info.distance(agent, e))
            .fold(f64::INFINITY, f64::min),
        TargetAssignment::AverageAllTargets => {
            -evaders.iter().map(|&e| info.distance(agent, e)).sum::<f64>() / evaders.len() as f64
        }
    }
}

/// Pursuer reward: bounding + collisions + catch bonus + distance term.
/// A catch also counts as a collision, so the net catch event is
/// `cr_pursuer - c3` on top of the distance term.
pub fn pursuer_reward(
    agent: usize,
    world: &WorldConfig,
    state: &WorldState,
    info: &StepInfo,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    expect_role(agent, state, Role::Pursuer)?;
    let caught = collided_with_role(agent, state, info, Role::Evader);
    Ok(RewardBreakdown {
        bounding: bounding_reward(state.agents[agent].position, cfg.c1, cfg.c2, world.half_extent),
        collision: collision_sum(agent, state, info, cfg.c3),
        catch: if caught { cfg.cr_pursuer } else { 0.0 },
        distance: distance_term(agent, state, info, cfg.target_assignment),
        ..RewardBreakdown::default()
    }
    .finalize())
}

/// Evader reward: bounding + collisions + caught penalty. Scouts are not
/// attackers; contact with them only counts through the collision term.
pub fn evader_reward(
    agent: usize,
    world: &WorldConfig,
    state: &WorldState,
    info: &StepInfo,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    expect_role(agent, state, Role::Evader)?;
    let caught = collided_with_role(agent, state, info, Role::Pursuer);
    Ok(RewardBreakdown {
        bounding: bounding_reward(state.agents[agent].position, cfg.c1, cfg.c2, world.half_extent),
        collision: collision_sum(agent, state, info, cfg.c3),
        catch: if caught { cfg.cr_evader } else { 0.0 },
        ..RewardBreakdown::default()
    }
    .finalize())
}

/// Scout reward: bounding + collisions + exploration, where exploration is
/// minus the largest Voronoi cell of a diagram over ALL agents' positions.
/// The diagram must carry one seed per agent (only the count is checked).
pub fn scout_reward(
    agent: usize,
    world: &WorldConfig,
    state: &WorldState,
    info: &StepInfo,
    diagram: &VoronoiDiagram,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    expect_role(agent, state, Role::Scout)?;
    if diagram.seeds.len() != state.agents.len() {
        return Err(RewardError::SeedCountMismatch {
            seeds: diagram.seeds.len(),
            agents: state.agents.len(),
        });
    }
    Ok(RewardBreakdown {
        bounding: bounding_reward(state.agents[agent].position, cfg.c1, cfg.c2, world.half_extent),
        collision: collision_sum(agent, state, info, cfg.c3),
        exploration: -max_cell_area(diagram),
        ..RewardBreakdown::default()
    }
    .finalize())
}

/// Route every agent to its role's reward. The Voronoi diagram is built once
/// per step and only when the world actually contains scouts.
pub fn compute_all_rewards(
    world: &WorldConfig,
    state: &WorldState,
    info: &StepInfo,
    cfg: &RewardConfig,
) -> Result<Vec<RewardBreakdown>, RewardError> {
    cfg.validate()?;
    let diagram = if state.agents.iter().any(|a| a.role == Role::Scout) {
        let seeds: Vec<Vec2> = state.agents.iter().map(|a| a.position).collect();
        Some(bounded_voronoi(&seeds, world.half_extent)?)
    } else {
        None
    };
    state
        .agents
        .iter()
        .map(|a| match a.role {
            Role::Pursuer => pursuer_reward(a.id, world, state, info, cfg),
            Role::Evader => evader_reward(a.id, world, state, info, cfg),
            Role::Scout => scout_reward(
                a.id,
                world,
                state,
                info,
                diagram.as_ref().expect("diagram built when scouts exist"),
                cfg,
            ),
        })
        .collect()
}
