//! Self-contained simulator and trainer for decentralized multi-target
//! pursuit-evasion with heterogeneous roles.
//!
//! The crate provides a deterministic bounded 2D particle world (`env`),
//! bounded Voronoi geometry and coverage estimation (`geometry`), role-based
//! reward functions (`rewards`), a dense neural substrate with hand-written
//! backpropagation (`neural`), a centralized-critic multi-agent actor-critic
//! trainer (`maddpg`), and metrics/export machinery (`metrics`).

pub mod env;
pub mod error;
pub mod geometry;
pub mod maddpg;
pub mod metrics;
pub mod neural;
pub mod rewards;
pub mod vec2;

pub use env::{AgentState, Observation, Obstacle, Role, StepInfo, WorldConfig, WorldState};
pub use error::{ConfigError, EnvError, GeometryError, MetricsError, NeuralError, RewardError, TrainError};
pub use geometry::{ConvexPolygon, VoronoiDiagram};
pub use maddpg::{AgentLearner, ReplayBuffer, TrainConfig, Trainer, Transition};
pub use metrics::{EpisodeAggregate, EpisodeLog};
pub use neural::{AdamState, Gradients, Mlp, Optimizer, OutputActivation};
pub use rewards::{RewardBreakdown, RewardConfig, TargetAssignment};
pub use vec2::Vec2;
