//! Shared fixtures for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pursuit_core::maddpg::{build_learners, AgentLearner, ReplayBuffer, TrainConfig, Transition};
use pursuit_core::{Vec2, WorldConfig, WorldState};

pub fn bench_world() -> WorldConfig {
    WorldConfig {
        n_pursuers: 5,
        n_scouts: 5,
        n_evaders: 2,
        n_obstacles: 3,
        ..WorldConfig::default()
    }
}

pub fn random_seeds(n: usize, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
        .collect()
}

pub fn random_state(cfg: &WorldConfig, seed: u64) -> WorldState {
    let (state, _) = pursuit_core::env::reset(cfg, seed).expect("bench world resets");
    state
}

pub struct LearnFixture {
    pub world: WorldConfig,
    pub train: TrainConfig,
    pub learners: Vec<AgentLearner>,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
}

pub fn learn_fixture(batch_size: usize) -> LearnFixture {
    let world = bench_world();
    let train = TrainConfig {
        batch_size,
        buffer_capacity: 4096,
        ..TrainConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let learners = build_learners(&world, &train, &mut rng);
    let mut buffer = ReplayBuffer::new(train.buffer_capacity, world.n_agents());
    let obs_len = world.observation_len();
    for _ in 0..1024 {
        let obs: Vec<Vec<f64>> = (0..world.n_agents())
            .map(|_| (0..obs_len).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let next_obs = obs.clone();
        buffer
            .push(Transition {
                obs,
                actions: (0..world.n_agents())
                    .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                    .collect(),
                rewards: (0..world.n_agents()).map(|_| rng.gen_range(-20.0..1.0)).collect(),
                next_obs,
            })
            .expect("arity matches");
    }
    LearnFixture {
        world,
        train,
        learners,
        buffer,
        rng,
    }
}
