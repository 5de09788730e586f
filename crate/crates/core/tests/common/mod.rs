//! Shared instance builders for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use obs_bandits::model::{GenerativeModel, RewardNoise};
use obs_bandits::state::StateSpace;
use obs_bandits::trace::RunTrace;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Three binary observations; only the first carries reward signal
/// (`r̄(a1) = 0.5 + 0.35·s₁`, the second action mirrored), the other two are
/// correlated noise that costs twice as much to observe. With `cost = 0.1`
/// the best set under `m = 2` is `{1}` with value 0.75.
pub fn signal_on_first_obs(cost: f64) -> GenerativeModel {
    let space = StateSpace::new(vec![vec![-1, 1], vec![-1, 1], vec![-1, 1]]).unwrap();
    let s = space.num_states();
    let mut joint = vec![0.0; s];
    for (idx, p) in joint.iter_mut().enumerate() {
        let st = space.state_at(idx);
        let mut prob = 1.0;
        for &x in st.values() {
            prob *= if x > 0 { 0.6 } else { 0.4 };
        }
        *p = prob;
    }
    let mut r1 = vec![0.0; s];
    let mut r2 = vec![0.0; s];
    for idx in 0..s {
        let st = space.state_at(idx);
        let s1 = st.values()[0] as f64;
        r1[idx] = 0.5 + 0.35 * s1;
        r2[idx] = 0.5 - 0.35 * s1;
    }
    GenerativeModel::new(
        space,
        2,
        joint,
        vec![r1, r2],
        vec![cost, 2.0 * cost, 2.0 * cost],
        RewardNoise::Bernoulli,
    )
    .unwrap()
}

/// A random desk-scale model: random alphabet sizes, a random joint (with a
/// chance of structural zeros), random rewards and costs.
pub fn random_model(
    seed: u64,
    max_d: usize,
    max_alpha: usize,
    max_actions: usize,
) -> GenerativeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=max_d);
    let sizes: Vec<usize> = (0..d).map(|_| rng.random_range(1..=max_alpha)).collect();
    let space = StateSpace::with_sizes(&sizes).unwrap();
    let s = space.num_states();
    let num_actions = rng.random_range(1..=max_actions);

    let mut joint: Vec<f64> = (0..s).map(|_| 0.05 + rng.random::<f64>()).collect();
    if s > 1 && seed.is_multiple_of(3) {
        // structural zeros exercise the zero-probability code paths
        let zeros = rng.random_range(1..=(s / 2).max(1));
        for _ in 0..zeros {
            let idx = rng.random_range(0..s);
            joint[idx] = 0.0;
        }
    }
    let total: f64 = joint.iter().sum();
    for p in &mut joint {
        *p /= total;
    }

    let mean_reward = (0..num_actions)
        .map(|_| (0..s).map(|_| rng.random::<f64>()).collect())
        .collect();
    let costs = (0..d).map(|_| rng.random::<f64>() * 0.4).collect();
    GenerativeModel::new(
        space,
        num_actions,
        joint,
        mean_reward,
        costs,
        RewardNoise::Bernoulli,
    )
    .unwrap()
}

/// Mean per-step regret of a window of a trace against an oracle value.
pub fn window_regret(
    trace: &RunTrace,
    oracle_value: f64,
    beta: f64,
    lo: usize,
    hi: usize,
) -> f64 {
    let rows = &trace.rows[lo..hi];
    let mut total = 0.0;
    for r in rows {
        total += oracle_value - (beta * r.reward - r.cost);
    }
    total / rows.len() as f64
}
