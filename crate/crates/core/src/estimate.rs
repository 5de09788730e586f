//! Visit counters, empirical estimates and confidence radii.
//!
//! Visit histories are kept as counts and reward sums (sufficient statistics
//! for every estimate used by the planners), stored in hash maps keyed by
//! canonical partial states and created lazily: the reachable state space can
//! be large while the visited part stays small.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::policy::{ActionId, ObsChoice};
use crate::state::{ObservationId, ObservationSet, PartialState, StateSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CounterError {
    #[error("partial state {psi} has domain {actual}, expected {expected}")]
    DomainMismatch {
        psi: PartialState,
        expected: ObservationSet,
        actual: ObservationSet,
    },
    #[error("recorded transition {from} --{choice:?}--> {to} is not a one-step extension")]
    InconsistentTransition {
        from: PartialState,
        choice: ObsChoice,
        to: PartialState,
    },
}

/// Inputs of the confidence-radius formulas that depend on the instance, not
/// on the data: `Ψ_tot`, `Ψ_max`, the action count, the observation count and
/// the failure probability `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    pub delta: f64,
    pub psi_tot: f64,
    pub psi_max: f64,
    pub num_actions: f64,
    pub num_observations: f64,
}

impl ConfidenceParams {
    pub fn new(space: &StateSpace, m: usize, num_actions: usize, delta: f64) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
        Self {
            delta,
            psi_tot: space.psi_tot(m),
            psi_max: space.psi_max() as f64,
            num_actions: num_actions as f64,
            num_observations: space.d() as f64,
        }
    }
}

/// Reward-estimate radius: `min(1, sqrt(log(20 Ψ_tot A t^5 / δ) / (2 max(1, n))))`.
///
/// The log term is evaluated as a sum of logs so large `t` cannot overflow.
pub fn conf1(n: u64, t: u64, params: &ConfidenceParams) -> f64 {
    debug_assert!(t >= 1);
    let log_term = (20.0f64).ln() + params.psi_tot.ln() + params.num_actions.ln()
        + 5.0 * (t as f64).ln()
        - params.delta.ln();
    (log_term / (2.0 * (n.max(1) as f64))).sqrt().min(1.0)
}

/// Distribution radius for a fixed observation set:
/// `min(1, sqrt(10 Ψ_tot log(4t/δ) / max(1, n)))`, except that an unvisited
/// set gets the full simplex diameter 2 so it stays maximally optimistic.
pub fn conf2_sim(n: u64, t: u64, params: &ConfidenceParams) -> f64 {
    debug_assert!(t >= 1);
    if n == 0 {
        return 2.0;
    }
    let log_term = (4.0f64).ln() + (t as f64).ln() - params.delta.ln();
    (10.0 * params.psi_tot * log_term / n as f64).sqrt().min(1.0)
}

/// Transition radius for a (state, observation) pair:
/// `min(1, sqrt(10 Ψ_max log(4 D Ψ_tot t / δ) / max(1, n)))`, with the same
/// unvisited default of 2 as [`conf2_sim`].
pub fn conf2_seq(n: u64, t: u64, params: &ConfidenceParams) -> f64 {
    debug_assert!(t >= 1);
    if n == 0 {
        return 2.0;
    }
    let log_term = (4.0f64).ln()
        + params.num_observations.ln()
        + params.psi_tot.ln()
        + (t as f64).ln()
        - params.delta.ln();
    (10.0 * params.psi_max * log_term / n as f64).sqrt().min(1.0)
}

/// All visit counters and reward sums, plus the in-round counters used by the
/// doubling rule. One store per run, single writer.
#[derive(Debug, Clone, Default)]
pub struct CounterStore {
    /// Completed steps.
    t: u64,
    /// `N(I)`: steps whose observation set contained `I`.
    n_obs_set: HashMap<ObservationSet, u64>,
    /// `N(dom(ψ), ψ)`: steps whose revealed state covered `ψ`.
    n_obs_partial: HashMap<PartialState, u64>,
    /// `N(a, ψ)`: steps that played `a` at exactly `ψ`.
    n_act: HashMap<(ActionId, PartialState), u64>,
    /// Reward sums aligned with `n_act`.
    sum_reward: HashMap<(ActionId, PartialState), f64>,
    /// `N(ψ, i)`: phases that observed `i` at `ψ`.
    n_trans_pair: HashMap<(PartialState, ObservationId), u64>,
    /// `N(ψ, i, ψ')`: phases that observed `i` at `ψ` and landed in `ψ'`.
    n_trans: HashMap<(PartialState, ObservationId, PartialState), u64>,
    /// In-round action visits `ν(a, ψ)`.
    nu_act: HashMap<(ActionId, PartialState), u64>,
    /// In-round transition visits `ν(ψ, i)`.
    nu_trans: HashMap<(PartialState, ObservationId), u64>,
}

impl CounterStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Completed step count.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Clears the in-round counters; called at the start of each round.
    pub fn begin_round(&mut self) {
        self.nu_act.clear();
        self.nu_trans.clear();
    }

    /// Records one simultaneous step: observed `psi` over `obs_set`, played
    /// `action`, received `reward`.
    ///
    /// Every substate of `psi` has its observation counters incremented; the
    /// reward counters are updated only at the exact `(action, psi)` pair,
    /// never at substates, which would bias the reward estimates.
    pub fn record_sim_step(
        &mut self,
        obs_set: ObservationSet,
        psi: &PartialState,
        action: ActionId,
        reward: f64,
    ) -> Result<(), CounterError> {
        if psi.domain() != obs_set {
            return Err(CounterError::DomainMismatch {
                psi: psi.clone(),
                expected: obs_set,
                actual: psi.domain(),
            });
        }
        for sub in psi.substates() {
            *self.n_obs_set.entry(sub.domain()).or_insert(0) += 1;
            *self.n_obs_partial.entry(sub).or_insert(0) += 1;
        }
        let key = (action, psi.clone());
        *self.n_act.entry(key.clone()).or_insert(0) += 1;
        *self.sum_reward.entry(key.clone()).or_insert(0.0) += reward;
        *self.nu_act.entry(key).or_insert(0) += 1;
        self.t += 1;
        Ok(())
    }

    /// Records one sequential observation phase. `Stop` phases are not
    /// counted: the stop transition is deterministic and needs no estimate.
    pub fn record_seq_phase(
        &mut self,
        psi: &PartialState,
        choice: ObsChoice,
        next: &PartialState,
    ) -> Result<(), CounterError> {
        let id = match choice {
            ObsChoice::Stop => {
                if next != psi {
                    return Err(CounterError::InconsistentTransition {
                        from: psi.clone(),
                        choice,
                        to: next.clone(),
                    });
                }
                return Ok(());
            }
            ObsChoice::Observe(id) => id,
        };
        let valid = match next.get(id) {
            Some(x) => psi.extend(id, x).is_ok_and(|e| &e == next),
            None => false,
        };
        if !valid {
            return Err(CounterError::InconsistentTransition {
                from: psi.clone(),
                choice,
                to: next.clone(),
            });
        }
        *self
            .n_trans_pair
            .entry((psi.clone(), id))
            .or_insert(0) += 1;
        *self
            .n_trans
            .entry((psi.clone(), id, next.clone()))
            .or_insert(0) += 1;
        *self.nu_trans.entry((psi.clone(), id)).or_insert(0) += 1;
        Ok(())
    }

    pub fn n_obs_set(&self, set: ObservationSet) -> u64 {
        self.n_obs_set.get(&set).copied().unwrap_or(0)
    }

    pub fn n_obs_partial(&self, psi: &PartialState) -> u64 {
        self.n_obs_partial.get(psi).copied().unwrap_or(0)
    }

    pub fn n_act(&self, action: ActionId, psi: &PartialState) -> u64 {
        self.n_act.get(&(action, psi.clone())).copied().unwrap_or(0)
    }

    pub fn n_trans_pair(&self, psi: &PartialState, id: ObservationId) -> u64 {
        self.n_trans_pair
            .get(&(psi.clone(), id))
            .copied()
            .unwrap_or(0)
    }

    pub fn n_trans(&self, psi: &PartialState, id: ObservationId, next: &PartialState) -> u64 {
        self.n_trans
            .get(&(psi.clone(), id, next.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn nu_act(&self, action: ActionId, psi: &PartialState) -> u64 {
        self.nu_act.get(&(action, psi.clone())).copied().unwrap_or(0)
    }

    pub fn nu_trans(&self, psi: &PartialState, id: ObservationId) -> u64 {
        self.nu_trans
            .get(&(psi.clone(), id))
            .copied()
            .unwrap_or(0)
    }

    /// Mean recorded reward for `(action, psi)` and its visit count;
    /// an unvisited pair reports 0 (the confidence radius covers it).
    pub fn reward_estimate(&self, action: ActionId, psi: &PartialState) -> (f64, u64) {
        let n = self.n_act(action, psi);
        if n == 0 {
            (0.0, 0)
        } else {
            let sum = self
                .sum_reward
                .get(&(action, psi.clone()))
                .copied()
                .unwrap_or(0.0);
            (sum / n as f64, n)
        }
    }

    /// Empirical probability of `psi` among steps observing its domain,
    /// together with `N(dom(ψ))`. Unvisited domains report the uniform
    /// distribution over their outcomes.
    pub fn prob_estimate(&self, space: &StateSpace, psi: &PartialState) -> (f64, u64) {
        let n = self.n_obs_set(psi.domain());
        if n == 0 {
            (1.0 / space.partials_count(psi.domain()) as f64, 0)
        } else {
            (self.n_obs_partial(psi) as f64 / n as f64, n)
        }
    }

    /// Empirical transition distribution over the one-step extensions of
    /// `psi` by `id`, in alphabet order, together with `N(ψ, i)`. An
    /// unvisited pair reports the uniform distribution.
    pub fn transition_estimate(
        &self,
        space: &StateSpace,
        psi: &PartialState,
        id: ObservationId,
    ) -> (Vec<f64>, u64) {
        let alphabet = space.alphabet(id);
        let n = self.n_trans_pair(psi, id);
        if n == 0 {
            return (vec![1.0 / alphabet.len() as f64; alphabet.len()], 0);
        }
        let dist = alphabet
            .iter()
            .map(|&x| {
                let next = psi.extend(id, x).expect("id not in domain");
                self.n_trans(psi, id, &next) as f64 / n as f64
            })
            .collect();
        (dist, n)
    }

    /// Structured text dump of every counter, in deterministic key order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "t = {}", self.t);

        let mut sets: Vec<_> = self.n_obs_set.iter().collect();
        sets.sort_by_key(|(set, _)| **set);
        let _ = writeln!(out, "[obs_sets]");
        for (set, n) in sets {
            let _ = writeln!(out, "{set} = {n}");
        }

        let mut partials: Vec<_> = self.n_obs_partial.iter().collect();
        partials.sort_by(|a, b| a.0.cmp(b.0));
        let _ = writeln!(out, "[obs_partials]");
        for (psi, n) in partials {
            let _ = writeln!(out, "{psi} = {n}");
        }

        let mut acts: Vec<_> = self.n_act.iter().collect();
        acts.sort_by(|a, b| a.0.cmp(b.0));
        let _ = writeln!(out, "[actions]");
        for ((a, psi), n) in acts {
            let sum = self
                .sum_reward
                .get(&(*a, psi.clone()))
                .copied()
                .unwrap_or(0.0);
            let _ = writeln!(out, "a{a} @ {psi} = {n} (reward sum {sum})");
        }

        let mut trans: Vec<_> = self.n_trans.iter().collect();
        trans.sort_by(|a, b| a.0.cmp(b.0));
        let _ = writeln!(out, "[transitions]");
        for ((psi, i, next), n) in trans {
            let _ = writeln!(out, "{psi} --{i}--> {next} = {n}");
        }
        out
    }
}

/// What the planners need to know about the world: reward estimates with
/// radii, outcome distributions with radii, transition distributions with
/// radii. Implemented by the learned counters and, for tests and degenerate
/// reductions, by the exact model.
pub trait EstimateSource {
    /// (mean-reward estimate, confidence radius) for `(action, psi)`.
    fn reward(&self, action: ActionId, psi: &PartialState) -> (f64, f64);
    /// (distribution over `states` in order, L1 radius) for observing `set`.
    fn obs_dist(&self, set: ObservationSet, states: &[PartialState]) -> (Vec<f64>, f64);
    /// (distribution over alphabet(id) in order, L1 radius) for extending
    /// `psi` by `id`.
    fn trans_dist(&self, psi: &PartialState, id: ObservationId) -> (Vec<f64>, f64);
}

/// Estimates backed by a [`CounterStore`] with the confidence radii evaluated
/// at the round-start time `t_k`.
pub struct LearnedEstimates<'a> {
    pub store: &'a CounterStore,
    pub params: &'a ConfidenceParams,
    pub space: &'a StateSpace,
    pub t_k: u64,
}

impl EstimateSource for LearnedEstimates<'_> {
    fn reward(&self, action: ActionId, psi: &PartialState) -> (f64, f64) {
        let (est, n) = self.store.reward_estimate(action, psi);
        (est, conf1(n, self.t_k, self.params))
    }

    fn obs_dist(&self, set: ObservationSet, states: &[PartialState]) -> (Vec<f64>, f64) {
        let n = self.store.n_obs_set(set);
        let dist = if n == 0 {
            vec![1.0 / states.len() as f64; states.len()]
        } else {
            states
                .iter()
                .map(|psi| self.store.n_obs_partial(psi) as f64 / n as f64)
                .collect()
        };
        (dist, conf2_sim(n, self.t_k, self.params))
    }

    fn trans_dist(&self, psi: &PartialState, id: ObservationId) -> (Vec<f64>, f64) {
        let (dist, n) = self.store.transition_estimate(self.space, psi, id);
        (dist, conf2_seq(n, self.t_k, self.params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs(i: usize) -> ObservationId {
        ObservationId::new(i).unwrap()
    }

    fn act(a: usize) -> ActionId {
        ActionId::new(a).unwrap()
    }

    fn psi(entries: &[(usize, i32)]) -> PartialState {
        PartialState::new(entries.iter().map(|&(i, x)| (obs(i), x))).unwrap()
    }

    fn params(psi_tot: f64, psi_max: f64, a: f64, d: f64, delta: f64) -> ConfidenceParams {
        ConfidenceParams {
            delta,
            psi_tot,
            psi_max,
            num_actions: a,
            num_observations: d,
        }
    }

    #[test]
    fn record_sim_step_updates_all_substates() {
        let mut store = CounterStore::new();
        let p = psi(&[(1, 0), (2, 1)]);
        store
            .record_sim_step(p.domain(), &p, act(1), 0.5)
            .unwrap();
        assert_eq!(store.t(), 1);
        assert_eq!(store.n_obs_set(ObservationSet::EMPTY), 1);
        assert_eq!(store.n_obs_set(ObservationSet::from_ids([obs(1)])), 1);
        assert_eq!(store.n_obs_set(ObservationSet::from_ids([obs(2)])), 1);
        assert_eq!(store.n_obs_set(p.domain()), 1);
        assert_eq!(store.n_obs_partial(&psi(&[(1, 0)])), 1);
        assert_eq!(store.n_obs_partial(&psi(&[(2, 1)])), 1);
        assert_eq!(store.n_obs_partial(&PartialState::empty()), 1);
        // reward counters only at the exact pair
        assert_eq!(store.n_act(act(1), &p), 1);
        assert_eq!(store.n_act(act(1), &psi(&[(1, 0)])), 0);
    }

    #[test]
    fn record_sim_step_empty_observation() {
        let mut store = CounterStore::new();
        store
            .record_sim_step(ObservationSet::EMPTY, &PartialState::empty(), act(2), 1.0)
            .unwrap();
        assert_eq!(store.n_obs_set(ObservationSet::EMPTY), 1);
        assert_eq!(store.n_obs_partial(&PartialState::empty()), 1);
        assert_eq!(store.n_act(act(2), &PartialState::empty()), 1);
    }

    #[test]
    fn record_sim_step_rejects_domain_mismatch() {
        let mut store = CounterStore::new();
        let err = store
            .record_sim_step(
                ObservationSet::from_ids([obs(1), obs(2)]),
                &psi(&[(1, 0)]),
                act(1),
                0.0,
            )
            .unwrap_err();
        assert!(matches!(err, CounterError::DomainMismatch { .. }));
    }

    #[test]
    fn repeated_steps_double_counts_not_estimates() {
        let mut store = CounterStore::new();
        let p = psi(&[(1, 1)]);
        for _ in 0..2 {
            store.record_sim_step(p.domain(), &p, act(1), 0.25).unwrap();
        }
        let (est, n) = store.reward_estimate(act(1), &p);
        assert_eq!(n, 2);
        assert!((est - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reward_estimate_examples() {
        let mut store = CounterStore::new();
        let p = PartialState::empty();
        assert_eq!(store.reward_estimate(act(1), &p), (0.0, 0));
        for r in [1.0, 0.0, 1.0] {
            store
                .record_sim_step(ObservationSet::EMPTY, &p, act(1), r)
                .unwrap();
        }
        let (est, n) = store.reward_estimate(act(1), &p);
        assert_eq!(n, 3);
        assert!((est - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn prob_estimate_examples() {
        let space = StateSpace::with_sizes(&[2]).unwrap();
        let store = CounterStore::new();
        // never observed: uniform over the two outcomes
        assert_eq!(store.prob_estimate(&space, &psi(&[(1, 0)])), (0.5, 0));

        let mut store = CounterStore::new();
        for k in 0..10 {
            let x = if k < 4 { 0 } else { 1 };
            let p = psi(&[(1, x)]);
            store.record_sim_step(p.domain(), &p, act(1), 0.0).unwrap();
        }
        let (p0, n) = store.prob_estimate(&space, &psi(&[(1, 0)]));
        assert_eq!(n, 10);
        assert!((p0 - 0.4).abs() < 1e-15);
        let (p1, _) = store.prob_estimate(&space, &psi(&[(1, 1)]));
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn record_seq_phase_and_transition_estimates() {
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        let mut store = CounterStore::new();
        let root = PartialState::empty();
        // 10 phases: 4 land on symbol 1, 6 on symbol 0
        for k in 0..10 {
            let x = if k < 4 { 1 } else { 0 };
            let next = root.extend(obs(2), x).unwrap();
            store
                .record_seq_phase(&root, ObsChoice::Observe(obs(2)), &next)
                .unwrap();
        }
        let (dist, n) = store.transition_estimate(&space, &root, obs(2));
        assert_eq!(n, 10);
        assert!((dist[0] - 0.6).abs() < 1e-15);
        assert!((dist[1] - 0.4).abs() < 1e-15);

        // first visit gives a point estimate
        let mut fresh = CounterStore::new();
        let next = root.extend(obs(1), 1).unwrap();
        fresh
            .record_seq_phase(&root, ObsChoice::Observe(obs(1)), &next)
            .unwrap();
        let (dist, n) = fresh.transition_estimate(&space, &root, obs(1));
        assert_eq!(n, 1);
        assert_eq!(dist, vec![0.0, 1.0]);

        // stop phases leave every counter untouched
        let before = store.clone();
        store
            .record_seq_phase(&root, ObsChoice::Stop, &root)
            .unwrap();
        assert_eq!(store.n_trans_pair(&root, obs(2)), before.n_trans_pair(&root, obs(2)));
        assert_eq!(store.t(), before.t());

        // inconsistent triples are rejected
        let bad = root.extend(obs(1), 0).unwrap();
        assert!(store
            .record_seq_phase(&root, ObsChoice::Observe(obs(2)), &bad)
            .is_err());
        assert!(store
            .record_seq_phase(&root, ObsChoice::Stop, &bad)
            .is_err());
    }

    #[test]
    fn unvisited_transition_is_uniform() {
        let space = StateSpace::new(vec![vec![0, 1, 2]]).unwrap();
        let store = CounterStore::new();
        let (dist, n) = store.transition_estimate(&space, &PartialState::empty(), obs(1));
        assert_eq!(n, 0);
        assert_eq!(dist, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn conf1_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 0.5);
        // n=0, t=1: sqrt(ln(40)/2) ≈ 1.358, capped at 1
        assert_eq!(conf1(0, 1, &p), 1.0);
        let r = conf1(1_000_000, 1, &p);
        assert!((r - 1.358e-3).abs() < 2e-6, "r={r}");
        // matches the direct formula where it cannot overflow
        let direct = ((20.0f64 * 1.0 * 1.0 * 1.0 / 0.5).ln() / (2.0 * 1e6)).sqrt();
        assert!((r - direct).abs() < 1e-15);
    }

    #[test]
    fn conf2_sim_examples() {
        let p = params(4.0, 2.0, 2.0, 2.0, 0.5);
        assert_eq!(conf2_sim(0, 1, &p), 2.0);
        let r = conf2_sim(10_000_000, 1, &p);
        assert!((r - 2.884e-3).abs() < 2e-6, "r={r}");
        let direct = (10.0 * 4.0 * (4.0f64 / 0.5).ln() / 1e7).sqrt();
        assert!((r - direct).abs() < 1e-15);
    }

    #[test]
    fn conf2_seq_examples() {
        let p = params(4.0, 2.0, 2.0, 2.0, 0.5);
        assert_eq!(conf2_seq(0, 1, &p), 2.0);
        let r = conf2_seq(10_000_000, 1, &p);
        assert!((r - 2.884e-3).abs() < 2e-6, "r={r}");
        let direct = (10.0 * 2.0 * (4.0f64 * 2.0 * 4.0 * 1.0 / 0.5).ln() / 1e7).sqrt();
        assert!((r - direct).abs() < 1e-15);

        // monotone in psi_max
        let bigger = params(4.0, 3.0, 2.0, 2.0, 0.5);
        assert!(conf2_seq(100, 1, &bigger) >= conf2_seq(100, 1, &p));
    }

    #[test]
    fn dump_is_deterministic_and_golden() {
        let mut store = CounterStore::new();
        let p = psi(&[(1, 0)]);
        store.record_sim_step(p.domain(), &p, act(1), 0.5).unwrap();
        let next = p.extend(obs(2), 1).unwrap();
        store
            .record_seq_phase(&p, ObsChoice::Observe(obs(2)), &next)
            .unwrap();
        let expected = "t = 1\n\
                        [obs_sets]\n\
                        {} = 1\n\
                        {1} = 1\n\
                        [obs_partials]\n\
                        {} = 1\n\
                        {1:0} = 1\n\
                        [actions]\n\
                        a1 @ {1:0} = 1 (reward sum 0.5)\n\
                        [transitions]\n\
                        {1:0} --2--> {1:0,2:1} = 1\n";
        assert_eq!(store.dump(), expected);
    }

    #[test]
    fn reward_estimate_matches_replayed_log() {
        let mut store = CounterStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        let mut log: Vec<(ActionId, PartialState, f64)> = Vec::new();
        for _ in 0..500 {
            let set = if rng.random::<bool>() {
                ObservationSet::from_ids([obs(1)])
            } else {
                ObservationSet::from_ids([obs(1), obs(2)])
            };
            let outcomes = space.enumerate_partials(set);
            let p = outcomes[rng.random_range(0..outcomes.len())].clone();
            let a = act(rng.random_range(1..=2));
            let r = rng.random::<f64>();
            store.record_sim_step(set, &p, a, r).unwrap();
            log.push((a, p, r));
        }
        // replay: arithmetic mean per (a, psi), summed in the same order
        let mut sums: HashMap<(ActionId, PartialState), (f64, u64)> = HashMap::new();
        for (a, p, r) in log {
            let e = sums.entry((a, p)).or_insert((0.0, 0));
            e.0 += r;
            e.1 += 1;
        }
        for ((a, p), (sum, n)) in sums {
            let (est, n_store) = store.reward_estimate(a, &p);
            assert_eq!(n, n_store);
            assert_eq!(est, sum / n as f64);
        }
    }

    proptest! {
        #[test]
        fn conf_radii_monotone_in_n(
            n1 in 0u64..1000, extra in 1u64..1000, t in 1u64..1_000_000
        ) {
            let p = params(9.0, 2.0, 2.0, 3.0, 0.1);
            let n2 = n1 + extra;
            prop_assert!(conf1(n2, t, &p) <= conf1(n1, t, &p));
            prop_assert!(conf2_sim(n2, t, &p) <= conf2_sim(n1, t, &p));
            prop_assert!(conf2_seq(n2, t, &p) <= conf2_seq(n1, t, &p));
        }

        #[test]
        fn counter_partition_invariants(seed in 0u64..500) {
            let space = StateSpace::with_sizes(&[2, 3, 2]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = CounterStore::new();
            let sets = space.enumerate_obs_sets(space.d()).unwrap();
            for _ in 0..200 {
                let set = sets[rng.random_range(0..sets.len())];
                let outcomes = space.enumerate_partials(set);
                let p = outcomes[rng.random_range(0..outcomes.len())].clone();
                store.record_sim_step(set, &p, act(1), rng.random()).unwrap();
            }
            // N(I) = Σ_{ψ ∈ Ψ⁺(I)} N(I, ψ) for every I
            for &set in &sets {
                let total: u64 = space
                    .enumerate_partials(set)
                    .iter()
                    .map(|p| store.n_obs_partial(p))
                    .sum();
                prop_assert_eq!(store.n_obs_set(set), total);
            }
            // subsets are counted at least as often as supersets
            for &a in &sets {
                for &b in &sets {
                    if a.is_subset_of(&b) {
                        prop_assert!(store.n_obs_set(a) >= store.n_obs_set(b));
                    }
                }
            }
        }
    }
}
