//! Policies over partial states: fixed-set simultaneous policies and
//! sequential observe-or-stop policies.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::state::{ObservationId, ObservationSet, PartialState, StateSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("action ids are 1-based; 0 is not a valid id")]
    ZeroActionId,
    #[error("action map is missing an entry for {0}")]
    IncompleteActionMap(PartialState),
    #[error("action map entry {0} has domain different from the policy's observation set")]
    ForeignActionMapEntry(PartialState),
    #[error("policy space has {count} policies, above the limit {limit}")]
    PolicySpaceOverflow { count: f64, limit: f64 },
}

/// 1-based index of an action (an arm in `1..=A`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(usize);

impl ActionId {
    pub fn new(index: usize) -> Result<Self, PolicyError> {
        if index == 0 {
            return Err(PolicyError::ZeroActionId);
        }
        Ok(Self(index))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn index0(self) -> usize {
        self.0 - 1
    }

    /// All actions `1..=num_actions` in ascending order.
    pub fn all(num_actions: usize) -> impl Iterator<Item = ActionId> {
        (1..=num_actions).map(ActionId)
    }
}

impl fmt::Debug for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sequential phase decision: buy one more observation or stop and act.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObsChoice {
    Stop,
    Observe(ObservationId),
}

impl fmt::Debug for ObsChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsChoice::Stop => write!(f, "stop"),
            ObsChoice::Observe(id) => write!(f, "obs{id}"),
        }
    }
}

/// A simultaneous policy: a fixed observation set plus an action for every
/// possible outcome of observing it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPolicy {
    obs_set: ObservationSet,
    action_map: HashMap<PartialState, ActionId>,
}

impl SimPolicy {
    /// Builds a policy, checking the action map is total on the outcomes of
    /// `obs_set` and contains nothing else.
    pub fn new(
        space: &StateSpace,
        obs_set: ObservationSet,
        action_map: HashMap<PartialState, ActionId>,
    ) -> Result<Self, PolicyError> {
        for psi in action_map.keys() {
            if psi.domain() != obs_set {
                return Err(PolicyError::ForeignActionMapEntry(psi.clone()));
            }
        }
        for psi in space.enumerate_partials(obs_set) {
            if !action_map.contains_key(&psi) {
                return Err(PolicyError::IncompleteActionMap(psi));
            }
        }
        Ok(Self {
            obs_set,
            action_map,
        })
    }

    pub fn obs_set(&self) -> ObservationSet {
        self.obs_set
    }

    pub fn action(&self, psi: &PartialState) -> ActionId {
        *self
            .action_map
            .get(psi)
            .unwrap_or_else(|| panic!("action map has no entry for {psi}"))
    }

    pub fn action_map(&self) -> &HashMap<PartialState, ActionId> {
        &self.action_map
    }
}

/// A sequential policy: an observe-or-stop function and an action function,
/// both over partial states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeqPolicy {
    obs_fn: HashMap<PartialState, ObsChoice>,
    action_fn: HashMap<PartialState, ActionId>,
}

impl SeqPolicy {
    pub fn new(
        obs_fn: HashMap<PartialState, ObsChoice>,
        action_fn: HashMap<PartialState, ActionId>,
    ) -> Self {
        Self { obs_fn, action_fn }
    }

    pub fn next_obs(&self, psi: &PartialState) -> Option<ObsChoice> {
        self.obs_fn.get(psi).copied()
    }

    pub fn action(&self, psi: &PartialState) -> Option<ActionId> {
        self.action_fn.get(psi).copied()
    }

    pub fn obs_fn(&self) -> &HashMap<PartialState, ObsChoice> {
        &self.obs_fn
    }

    pub fn action_fn(&self) -> &HashMap<PartialState, ActionId> {
        &self.action_fn
    }
}

/// Number of simultaneous policies with at most `m` observations,
/// `Σ_{I ∈ P≤m} A^{|Ψ⁺(I)|}`, as f64 (it can be astronomically large).
pub fn sim_policy_count(space: &StateSpace, num_actions: usize, m: usize) -> f64 {
    let mut total = 0.0f64;
    for set in space
        .enumerate_obs_sets(m)
        .expect("m must be at most D")
    {
        total += (num_actions as f64).powi(space.partials_count(set) as i32);
        if !total.is_finite() {
            return f64::INFINITY;
        }
    }
    total
}

/// Enumerates every simultaneous policy with at most `m` observations, in
/// deterministic order: observation sets in (size, lex) order, action maps in
/// odometer order (the action of the last outcome varying fastest). Refuses
/// to materialize more than `limit` policies.
pub fn enumerate_sim_policies(
    space: &StateSpace,
    num_actions: usize,
    m: usize,
    limit: f64,
) -> Result<Vec<SimPolicy>, PolicyError> {
    let count = sim_policy_count(space, num_actions, m);
    if count > limit {
        return Err(PolicyError::PolicySpaceOverflow { count, limit });
    }
    let mut out = Vec::with_capacity(count as usize);
    for set in space.enumerate_obs_sets(m).expect("m must be at most D") {
        let states = space.enumerate_partials(set);
        let n = states.len();
        let mut assignment = vec![1usize; n];
        loop {
            let action_map = states
                .iter()
                .cloned()
                .zip(assignment.iter().map(|&a| ActionId(a)))
                .collect();
            out.push(SimPolicy {
                obs_set: set,
                action_map,
            });
            // next assignment, last outcome fastest
            let mut j = n;
            loop {
                if j == 0 {
                    break;
                }
                if assignment[j - 1] < num_actions {
                    assignment[j - 1] += 1;
                    for a in assignment.iter_mut().skip(j) {
                        *a = 1;
                    }
                    break;
                }
                j -= 1;
            }
            if j == 0 {
                break;
            }
        }
    }
    Ok(out)
}
