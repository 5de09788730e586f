//! Exact oracles for both decision protocols, computed from the true model:
//! the best fixed-observation-set policy by direct enumeration, and the best
//! sequential policy by backward induction.
//!
//! These are the benchmarks regret is measured against, and double as
//! independent references for the optimistic planners in tests: both oracles
//! evaluate expected gains by direct summation over outcomes, not through the
//! planners' inner optimizer.

use std::collections::HashMap;

use rand::Rng;

use crate::estimate::EstimateSource;
use crate::model::GenerativeModel;
use crate::policy::{ActionId, ObsChoice, SeqPolicy, SimPolicy};
use crate::state::{ObservationId, ObservationSet, PartialState};
use crate::trace::{AlgorithmKind, RunTrace, StepRow};

/// An oracle's exact expected per-step gain together with the policy that
/// attains it.
#[derive(Debug, Clone)]
pub struct OracleResult<P> {
    pub value: f64,
    pub policy: P,
}

/// Exact expected gain of a simultaneous policy:
/// `β Σ_{ψ∈Ψ⁺(I)} p(ψ) r̄(h(ψ), ψ) − Σ_{i∈I} c_i`.
pub fn policy_gain_sim(model: &GenerativeModel, policy: &SimPolicy, beta: f64) -> f64 {
    let set = policy.obs_set();
    let mut expected = 0.0;
    for psi in model.space().enumerate_partials(set) {
        let p = model.marginal_prob(&psi);
        if p <= 0.0 {
            continue;
        }
        let r = model
            .marginal_reward(policy.action(&psi), &psi)
            .expect("positive-probability state");
        expected += p * (beta * r);
    }
    expected - model.obs_cost(set)
}

/// Best action and its marginal reward at `psi`; zero-probability states get
/// the first action with reward 0 so downstream sums are unaffected.
fn best_action(model: &GenerativeModel, psi: &PartialState) -> (ActionId, f64) {
    let p = model.marginal_prob(psi);
    let first = ActionId::new(1).expect("nonzero");
    if p <= 0.0 {
        return (first, 0.0);
    }
    let mut best = first;
    let mut best_r = model
        .marginal_reward(first, psi)
        .expect("positive probability");
    for a in model.actions().skip(1) {
        let r = model.marginal_reward(a, psi).expect("positive probability");
        if r > best_r {
            best = a;
            best_r = r;
        }
    }
    (best, best_r)
}

/// Exact maximizer of the fixed-set value `V(I)` over all observation sets of
/// cardinality at most `m`, acting optimally on every outcome. Ties break
/// toward the smaller set, then lexicographically.
pub fn oracle_sim(model: &GenerativeModel, m: usize, beta: f64) -> OracleResult<SimPolicy> {
    let space = model.space();
    let mut best: Option<(f64, ObservationSet, HashMap<PartialState, ActionId>)> = None;
    for set in space.enumerate_obs_sets(m).expect("m <= D") {
        let mut value = 0.0;
        let mut action_map = HashMap::new();
        for psi in space.enumerate_partials(set) {
            let p = model.marginal_prob(&psi);
            let (action, reward) = best_action(model, &psi);
            value += p * (beta * reward);
            action_map.insert(psi, action);
        }
        value -= model.obs_cost(set);
        // enumeration order is (size, lex); strict > keeps the earlier set
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, set, action_map));
        }
    }
    let (value, set, action_map) = best.expect("at least the empty set");
    OracleResult {
        value,
        policy: SimPolicy::new(space, set, action_map).expect("total by construction"),
    }
}

/// Exact backward induction over observation phases using the true transition
/// probabilities and rewards. Returns `F*₀(ψ₀)` and a greedy policy; ties
/// prefer stopping, then the lowest observation id.
pub fn oracle_seq(model: &GenerativeModel, m: usize, beta: f64) -> OracleResult<SeqPolicy> {
    let space = model.space();
    let mut f_values: HashMap<PartialState, f64> = HashMap::new();
    let mut obs_fn = HashMap::new();
    let mut action_fn = HashMap::new();

    for layer in (0..=m).rev() {
        for set in space.enumerate_obs_sets(m).expect("m <= D") {
            if set.len() != layer {
                continue;
            }
            for psi in space.enumerate_partials(set) {
                if model.marginal_prob(&psi) <= 0.0 {
                    continue;
                }
                let (action, reward) = best_action(model, &psi);
                let stop_value = beta * reward;
                action_fn.insert(psi.clone(), action);
                let mut best_choice = ObsChoice::Stop;
                let mut best_value = stop_value;
                if layer < m {
                    for i in space.observation_ids() {
                        if psi.get(i).is_some() {
                            continue;
                        }
                        let mut continuation = 0.0;
                        for &x in space.alphabet(i) {
                            let next = psi.extend(i, x).expect("not in domain");
                            let w = model.transition_prob(&psi, ObsChoice::Observe(i), &next);
                            let f_next = f_values.get(&next).copied().unwrap_or(0.0);
                            continuation += w * f_next;
                        }
                        let q = continuation - model.cost_of(i);
                        if q > best_value {
                            best_value = q;
                            best_choice = ObsChoice::Observe(i);
                        }
                    }
                }
                f_values.insert(psi.clone(), best_value);
                obs_fn.insert(psi, best_choice);
            }
        }
    }

    let root = PartialState::empty();
    let value = f_values[&root];
    OracleResult {
        value,
        policy: SeqPolicy::new(obs_fn, action_fn),
    }
}

/// Exact expected per-step gain of a uniform-random simultaneous policy that
/// draws an observation set uniformly from `P≤m(D)` and an action uniformly:
/// `β · mean_a E[r̄(a, Φ)] − mean_I cost(I)`.
pub fn uniform_random_gain(model: &GenerativeModel, m: usize, beta: f64) -> f64 {
    let space = model.space();
    let root = PartialState::empty();
    let mut mean_reward = 0.0;
    for a in model.actions() {
        mean_reward += model
            .marginal_reward(a, &root)
            .expect("prior has mass");
    }
    mean_reward /= model.num_actions() as f64;
    let sets = space.enumerate_obs_sets(m).expect("m <= D");
    let mean_cost: f64 = sets.iter().map(|&s| model.obs_cost(s)).sum::<f64>() / sets.len() as f64;
    beta * mean_reward - mean_cost
}

/// Executes a fixed simultaneous policy for `horizon` steps.
pub fn run_fixed_sim_policy(
    model: &GenerativeModel,
    policy: &SimPolicy,
    horizon: u64,
    rng: &mut impl Rng,
) -> RunTrace {
    let set = policy.obs_set();
    let cost = model.obs_cost(set);
    let mut rows = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let state = model.sample_state(rng);
        let psi = state.restrict(set);
        let action = policy.action(&psi);
        let reward = model.sample_reward(action, &state, rng);
        rows.push(StepRow {
            t,
            observed: set,
            psi,
            cost,
            action,
            reward,
        });
    }
    RunTrace {
        algorithm: AlgorithmKind::SimOos,
        rows,
        rounds: 1,
    }
}

/// Executes a fixed sequential policy for `horizon` steps. The policy is
/// followed until it stops or `m` is exhausted; states the policy does not
/// map fall back to stopping with action 1.
pub fn run_fixed_seq_policy(
    model: &GenerativeModel,
    policy: &SeqPolicy,
    m: usize,
    horizon: u64,
    rng: &mut impl Rng,
) -> RunTrace {
    let mut rows = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let state = model.sample_state(rng);
        let mut psi = PartialState::empty();
        let mut cost = 0.0;
        while psi.len() < m {
            match policy.next_obs(&psi) {
                Some(ObsChoice::Observe(i)) => {
                    cost += model.cost_of(i);
                    psi = psi.extend(i, state.get(i)).expect("policy avoids repeats");
                }
                Some(ObsChoice::Stop) | None => break,
            }
        }
        let action = policy
            .action(&psi)
            .unwrap_or_else(|| ActionId::new(1).expect("nonzero"));
        let reward = model.sample_reward(action, &state, rng);
        rows.push(StepRow {
            t,
            observed: psi.domain(),
            psi,
            cost,
            action,
            reward,
        });
    }
    RunTrace {
        algorithm: AlgorithmKind::SeqOos,
        rows,
        rounds: 1,
    }
}

/// Estimates taken verbatim from the true model with all confidence radii
/// zero. Feeding this to a planner degenerates optimism to exact planning,
/// which must then agree with the oracles.
pub struct ExactEstimates<'a> {
    pub model: &'a GenerativeModel,
}

impl EstimateSource for ExactEstimates<'_> {
    fn reward(&self, action: ActionId, psi: &PartialState) -> (f64, f64) {
        if self.model.marginal_prob(psi) <= 0.0 {
            return (0.0, 0.0);
        }
        let r = self
            .model
            .marginal_reward(action, psi)
            .expect("positive probability");
        (r, 0.0)
    }

    fn obs_dist(&self, _set: ObservationSet, states: &[PartialState]) -> (Vec<f64>, f64) {
        let dist = states.iter().map(|p| self.model.marginal_prob(p)).collect();
        (dist, 0.0)
    }

    fn trans_dist(&self, psi: &PartialState, id: ObservationId) -> (Vec<f64>, f64) {
        let space = self.model.space();
        let dist = if self.model.marginal_prob(psi) <= 0.0 {
            vec![1.0 / space.alphabet(id).len() as f64; space.alphabet(id).len()]
        } else {
            space
                .alphabet(id)
                .iter()
                .map(|&x| {
                    let next = psi.extend(id, x).expect("id not in domain");
                    self.model.transition_prob(psi, ObsChoice::Observe(id), &next)
                })
                .collect()
        };
        (dist, 0.0)
    }
}
