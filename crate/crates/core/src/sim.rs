//! Round-based optimistic simultaneous observation selection.
//!
//! Each round plans a fixed observation set and an action map by maximizing
//! an optimistic value over every candidate set: per-outcome optimistic
//! action values feed the L1-ball inner maximizer, and the set with the best
//! optimistic value minus cost wins. The round then executes that policy
//! until some in-round visit count catches up with its historical count (the
//! doubling rule), which bounds the number of re-plans logarithmically.

use std::collections::HashMap;

use rand::Rng;

use crate::estimate::{ConfidenceParams, CounterStore, EstimateSource, LearnedEstimates};
use crate::l1max::{l1_linear_max, L1BallProblem};
use crate::model::GenerativeModel;
use crate::policy::{ActionId, SimPolicy};
use crate::state::{ObservationSet, PartialState, StateError, StateSpace};
use crate::trace::{AlgorithmKind, RunTrace, StepRow};

/// Per-candidate-set context precomputed once per run.
struct SetContext {
    set: ObservationSet,
    states: Vec<PartialState>,
    cost: f64,
}

/// Planning enumerates every candidate set and all of their outcomes; cap
/// the materialized space at desk scale.
pub(crate) fn check_planning_scale(space: &StateSpace, m: usize) -> Result<(), StateError> {
    const LIMIT: f64 = 2e6;
    let count = space.psi_tot(m);
    if count > LIMIT {
        return Err(StateError::PlanningSpaceTooLarge {
            count,
            limit: LIMIT,
        });
    }
    Ok(())
}

/// The policy planned for one round together with the optimistic value table
/// it was chosen from.
#[derive(Debug, Clone)]
pub struct SimPlan {
    pub policy: SimPolicy,
    /// Optimistic value `V̂(I)` per candidate set, in (size, lex) order.
    pub vhat: Vec<(ObservationSet, f64)>,
    /// Time index at the start of the round (1-based).
    pub t_start: u64,
}

/// Plans a simultaneous policy from an arbitrary estimate source.
///
/// For every set `I` of cardinality at most `m`: each outcome `ψ` gets the
/// optimistic action value `β (r̂ + conf₁)` (argmax over actions on the
/// unscaled score, ties toward the lowest action), the outcome distribution
/// is tilted inside its L1 ball toward those values, and the cost of `I` is
/// subtracted. The argmax set wins, ties toward smaller then lexicographic.
pub fn plan_sim_with(
    src: &impl EstimateSource,
    space: &StateSpace,
    costs: &[f64],
    num_actions: usize,
    m: usize,
    beta: f64,
) -> SimPlan {
    let contexts = build_contexts(space, costs, m);
    plan_from_contexts(src, &contexts, space, num_actions, beta, 1)
}

fn build_contexts(space: &StateSpace, costs: &[f64], m: usize) -> Vec<SetContext> {
    space
        .enumerate_obs_sets(m)
        .expect("m <= D")
        .into_iter()
        .map(|set| SetContext {
            set,
            states: space.enumerate_partials(set),
            cost: set.ids().map(|id| costs[id.index0()]).sum(),
        })
        .collect()
}

fn plan_from_contexts(
    src: &impl EstimateSource,
    contexts: &[SetContext],
    space: &StateSpace,
    num_actions: usize,
    beta: f64,
    t_start: u64,
) -> SimPlan {
    let mut vhat = Vec::with_capacity(contexts.len());
    let mut best: Option<(f64, usize, HashMap<PartialState, ActionId>)> = None;
    for (ctx_idx, ctx) in contexts.iter().enumerate() {
        let mut optimistic = Vec::with_capacity(ctx.states.len());
        let mut action_map = HashMap::with_capacity(ctx.states.len());
        for psi in &ctx.states {
            let mut best_a = ActionId::new(1).expect("nonzero");
            let mut best_score = f64::NEG_INFINITY;
            for a in ActionId::all(num_actions) {
                let (est, radius) = src.reward(a, psi);
                // rewards live in [0, 1], so the optimistic mean is capped
                let score = (est + radius).min(1.0);
                if score > best_score {
                    best_score = score;
                    best_a = a;
                }
            }
            optimistic.push(beta * best_score);
            action_map.insert(psi.clone(), best_a);
        }
        let (p_hat, radius) = src.obs_dist(ctx.set, &ctx.states);
        let problem = L1BallProblem::new(p_hat, optimistic, radius)
            .expect("estimates form a distribution");
        let (_, value) = l1_linear_max(&problem);
        let v = value - ctx.cost;
        vhat.push((ctx.set, v));
        if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
            best = Some((v, ctx_idx, action_map));
        }
    }
    let (_, ctx_idx, action_map) = best.expect("at least the empty set");
    let policy = SimPolicy::new(space, contexts[ctx_idx].set, action_map)
        .expect("total by construction");
    SimPlan {
        policy,
        vhat,
        t_start,
    }
}

/// Online state of one Sim-OOS run.
pub struct SimOos {
    space: StateSpace,
    costs: Vec<f64>,
    num_actions: usize,
    beta: f64,
    params: ConfidenceParams,
    contexts: Vec<SetContext>,
    store: CounterStore,
    rounds: u64,
    plan: Option<SimPlan>,
}

impl SimOos {
    /// The algorithm knows the combinatorial structure and the costs; the
    /// joint distribution and rewards stay hidden behind the environment.
    pub fn new(
        space: StateSpace,
        costs: Vec<f64>,
        num_actions: usize,
        m: usize,
        beta: f64,
        delta: f64,
    ) -> Result<Self, StateError> {
        if m > space.d() {
            return Err(StateError::BudgetExceedsObservations { m, d: space.d() });
        }
        check_planning_scale(&space, m)?;
        let params = ConfidenceParams::new(&space, m, num_actions, delta);
        let contexts = build_contexts(&space, &costs, m);
        Ok(Self {
            space,
            costs,
            num_actions,
            beta,
            params,
            contexts,
            store: CounterStore::new(),
            rounds: 0,
            plan: None,
        })
    }

    pub fn counters(&self) -> &CounterStore {
        &self.store
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn current_plan(&self) -> Option<&SimPlan> {
        self.plan.as_ref()
    }

    /// Recomputes the round policy from the current counters.
    pub fn plan_round(&mut self) -> &SimPlan {
        self.store.begin_round();
        let t_k = self.store.t() + 1;
        let src = LearnedEstimates {
            store: &self.store,
            params: &self.params,
            space: &self.space,
            t_k,
        };
        let plan = plan_from_contexts(
            &src,
            &self.contexts,
            &self.space,
            self.num_actions,
            self.beta,
            t_k,
        );
        self.rounds += 1;
        self.plan = Some(plan);
        self.plan.as_ref().expect("just planned")
    }

    /// Executes the current round policy until the doubling rule fires or
    /// `max_steps` steps have been taken. Returns the executed rows.
    pub fn run_round(
        &mut self,
        env: &GenerativeModel,
        rng: &mut impl Rng,
        max_steps: u64,
    ) -> Vec<StepRow> {
        let plan = self.plan.as_ref().expect("round must be planned");
        let set = plan.policy.obs_set();
        let cost: f64 = set.ids().map(|id| self.costs[id.index0()]).sum();
        let mut rows = Vec::new();
        for _ in 0..max_steps {
            let state = env.sample_state(rng);
            let psi = state.restrict(set);
            let action = plan.policy.action(&psi);
            let reward = env.sample_reward(action, &state, rng);
            self.store
                .record_sim_step(set, &psi, action, reward)
                .expect("revealed state matches the chosen set");
            rows.push(StepRow {
                t: self.store.t(),
                observed: set,
                psi: psi.clone(),
                cost,
                action,
                reward,
            });
            // Doubling rule: the round ends right after the step whose
            // in-round visit count reaches the round-start count.
            let nu = self.store.nu_act(action, &psi);
            let historical = self.store.n_act(action, &psi) - nu;
            if nu >= historical.max(1) {
                break;
            }
        }
        rows
    }

    /// Full online loop for `horizon` steps.
    pub fn run(
        env: &GenerativeModel,
        m: usize,
        beta: f64,
        delta: f64,
        horizon: u64,
        rng: &mut impl Rng,
    ) -> RunTrace {
        let mut algo = Self::new(
            env.space().clone(),
            env.costs().to_vec(),
            env.num_actions(),
            m,
            beta,
            delta,
        )
        .expect("valid configuration");
        let mut rows = Vec::with_capacity(horizon as usize);
        while (rows.len() as u64) < horizon {
            algo.plan_round();
            let segment = algo.run_round(env, rng, horizon - rows.len() as u64);
            rows.extend(segment);
        }
        RunTrace {
            algorithm: AlgorithmKind::SimOos,
            rows,
            rounds: algo.rounds,
        }
    }
}
