use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pursuit_bench::{bench_world, learn_fixture, random_seeds, random_state};
use pursuit_core::geometry::{bounded_voronoi, coverage_fraction, max_cell_area};
use pursuit_core::maddpg::{actor_update, critic_update, select_actions, td_targets};
use pursuit_core::rewards::{compute_all_rewards, RewardConfig};
use pursuit_core::{env, StepInfo};

fn bench_voronoi(c: &mut Criterion) {
    let seeds = random_seeds(12, 3);
    c.bench_function("voronoi_12_seeds", |b| {
        b.iter(|| {
            let d = bounded_voronoi(black_box(&seeds), 3.0).unwrap();
            black_box(max_cell_area(&d))
        })
    });
    let positions = random_seeds(10, 4);
    c.bench_function("coverage_300_grid_10_agents", |b| {
        b.iter(|| black_box(coverage_fraction(black_box(&positions), 0.5, 3.0, 300)))
    });
}

fn bench_env(c: &mut Criterion) {
    let world = bench_world();
    let state = random_state(&world, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let actions: Vec<[f64; 2]> = (0..world.n_agents())
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    c.bench_function("env_step_12_agents", |b| {
        b.iter(|| black_box(env::step(&world, black_box(&state), &actions).unwrap()))
    });
    let info = StepInfo::from_state(&state);
    let rewards = RewardConfig::default();
    c.bench_function("rewards_all_agents", |b| {
        b.iter(|| black_box(compute_all_rewards(&world, &state, &info, &rewards).unwrap()))
    });
}

fn bench_learning(c: &mut Criterion) {
    let mut fx = learn_fixture(256);
    let obs_len = fx.world.observation_len();
    let joint_obs: Vec<Vec<f64>> = (0..fx.world.n_agents())
        .map(|_| (0..obs_len).map(|_| fx.rng.gen_range(-3.0..3.0)).collect())
        .collect();
    c.bench_function("select_actions_12_agents", |b| {
        b.iter(|| {
            black_box(select_actions(&fx.learners, &joint_obs, 0.1, &mut fx.rng).unwrap())
        })
    });
    c.bench_function("agent_update_round_k256", |b| {
        b.iter(|| {
            let batch = fx.buffer.sample(256, &mut fx.rng).unwrap();
            let y = td_targets(0, &batch, &fx.learners, 0.95).unwrap();
            let loss = critic_update(&mut fx.learners[0], &batch, &y).unwrap();
            let q = actor_update(&mut fx.learners[0], 0, &batch).unwrap();
            fx.learners[0].soft_update_targets(0.01).unwrap();
            black_box((loss, q))
        })
    });
}

criterion_group!(benches, bench_voronoi, bench_env, bench_learning);
criterion_main!(benches);
