//! Comparison algorithms: a contextual UCB that always buys every
//! observation, and the meta-action reduction that treats each (observation
//! set, action map) pair as one arm of a flat UCB1 instance.

use rand::Rng;

use crate::model::GenerativeModel;
use crate::policy::{enumerate_sim_policies, ActionId, PolicyError};
use crate::trace::{AlgorithmKind, RunTrace, StepRow};

/// Pull count and running mean reward of one UCB arm.
#[derive(Debug, Clone, Copy, Default)]
pub struct UcbArmStats {
    pub pulls: u64,
    pub mean: f64,
}

impl UcbArmStats {
    fn update(&mut self, reward: f64) {
        self.pulls += 1;
        self.mean += (reward - self.mean) / self.pulls as f64;
    }

    /// `mean + sqrt(2 ln t / pulls)`; untried arms are infinitely attractive.
    fn ucb(&self, t: u64) -> f64 {
        if self.pulls == 0 {
            f64::INFINITY
        } else {
            self.mean + (2.0 * (t as f64).ln() / self.pulls as f64).sqrt()
        }
    }
}

/// Baseline that pays for every observation each step and runs UCB1 per
/// fully observed context.
pub fn contextual_ucb_run(
    env: &GenerativeModel,
    beta: f64,
    horizon: u64,
    rng: &mut impl Rng,
) -> RunTrace {
    let _ = beta; // gain weighting happens in the summaries, not in decisions
    let space = env.space();
    let num_states = space.num_states();
    let num_actions = env.num_actions();
    let full = space.full_set();
    let full_cost: f64 = env.obs_cost(full);
    let mut stats = vec![UcbArmStats::default(); num_states * num_actions];

    let mut rows = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let state = env.sample_state(rng);
        let ctx = space.state_index(&state);
        let arm_stats = |a: ActionId| stats[ctx * num_actions + a.index0()];
        // untried arms first (lowest index), then the UCB score
        let mut action = ActionId::new(1).expect("nonzero");
        let mut best_score = arm_stats(action).ucb(t);
        for a in ActionId::all(num_actions).skip(1) {
            let score = arm_stats(a).ucb(t);
            if score > best_score {
                best_score = score;
                action = a;
            }
        }
        let reward = env.sample_reward(action, &state, rng);
        stats[ctx * num_actions + action.index0()].update(reward);
        rows.push(StepRow {
            t,
            observed: full,
            psi: state.to_partial(),
            cost: full_cost,
            action,
            reward,
        });
    }
    RunTrace {
        algorithm: AlgorithmKind::ContextualUcb,
        rows,
        rounds: 1,
    }
}

/// Largest meta-action space the reduction will materialize.
pub const META_POLICY_LIMIT: f64 = 1e4;

/// The meta-action reduction: every simultaneous policy with at most `m`
/// observations becomes one arm; arm rewards fold costs into the step gain
/// `β r − cost(I)` rescaled to `[0, 1]` with the global bounds
/// `[−Σ_i c_i, β]`. Refuses instances with more than [`META_POLICY_LIMIT`]
/// policies — the whole point of the reduction's poor scaling.
pub fn meta_ucb_run(
    env: &GenerativeModel,
    beta: f64,
    m: usize,
    horizon: u64,
    rng: &mut impl Rng,
) -> Result<RunTrace, PolicyError> {
    let space = env.space();
    let arms = enumerate_sim_policies(space, env.num_actions(), m, META_POLICY_LIMIT)?;
    let arm_costs: Vec<f64> = arms.iter().map(|p| env.obs_cost(p.obs_set())).collect();
    let mut stats = vec![UcbArmStats::default(); arms.len()];

    let lo = -env.obs_cost(space.full_set());
    let scale = beta - lo;

    let mut rows = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let mut arm = 0;
        let mut best_score = stats[0].ucb(t);
        for (k, s) in stats.iter().enumerate().skip(1) {
            let score = s.ucb(t);
            if score > best_score {
                best_score = score;
                arm = k;
            }
        }
        let policy = &arms[arm];
        let state = env.sample_state(rng);
        let psi = state.restrict(policy.obs_set());
        let action = policy.action(&psi);
        let reward = env.sample_reward(action, &state, rng);
        let gain = beta * reward - arm_costs[arm];
        stats[arm].update((gain - lo) / scale);
        rows.push(StepRow {
            t,
            observed: policy.obs_set(),
            psi,
            cost: arm_costs[arm],
            action,
            reward,
        });
    }
    Ok(RunTrace {
        algorithm: AlgorithmKind::MetaUcb,
        rows,
        rounds: 1,
    })
}
