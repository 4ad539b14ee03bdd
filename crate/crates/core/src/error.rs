use thiserror::Error;

/// Validation failure in a configuration struct. Always names the offending key.
#[derive(Debug, Error)]
#[error("invalid config: `{key}` {reason}")]
pub struct ConfigError {
    pub key: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            key,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("spawn rejection budget ({budget} attempts) exceeded while placing {entity}; configuration is too dense")]
    SpawnBudgetExceeded { entity: String, budget: usize },
    #[error("expected {expected} actions, got {got}")]
    ActionArity { expected: usize, got: usize },
    #[error("non-finite action component for agent {agent}")]
    NonFiniteAction { agent: usize },
    #[error("agent id {agent} out of range (world has {n_agents} agents)")]
    BadAgentId { agent: usize, n_agents: usize },
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("voronoi diagram requires at least one seed")]
    EmptySeeds,
    #[error("seed {index} has a non-finite coordinate")]
    NonFiniteSeed { index: usize },
}

#[derive(Debug, Error)]
pub enum RewardError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("agent {agent} has role {actual}, expected {expected}")]
    RoleMismatch {
        agent: usize,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("voronoi diagram has {seeds} seeds but the world has {agents} agents")]
    SeedCountMismatch { seeds: usize, agents: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("dimension mismatch: {context}")]
    DimMismatch { context: String },
    #[error("non-finite gradient; update refused")]
    NonFiniteGradient,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint format: {0}")]
    Format(String),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("transition has {got} agents, buffer expects {expected}")]
    TransitionArity { expected: usize, got: usize },
    #[error("replay buffer holds {size} transitions, cannot sample a batch of {requested}")]
    BufferUnderfull { size: usize, requested: usize },
    #[error("non-finite {what} for agent {agent} at episode {episode}, step {step}")]
    NonFinite {
        what: &'static str,
        agent: usize,
        episode: usize,
        step: usize,
    },
    #[error("shape mismatch between live and target networks")]
    ShapeMismatch,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("episode sink: {0}")]
    Sink(std::io::Error),
    #[error("episode {episode}, step {step}, agent {agent}: {source}")]
    AtStep {
        episode: usize,
        step: usize,
        agent: usize,
        #[source]
        source: Box<TrainError>,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("distance stats need at least one pursuer and one evader")]
    MissingRoles,
    #[error("series of length {len} is too short to truncate {skip} entries")]
    SeriesTooShort { len: usize, skip: usize },
    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },
    #[error("csv io: {0}")]
    Io(#[from] std::io::Error),
}
