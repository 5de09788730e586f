//! Sequential optimistic observation selection.
//!
//! Each round runs backward induction over observation phases ordered by
//! domain size: terminal states get optimistic action values, interior states
//! compare stopping against each affordable observation whose continuation
//! value is tilted inside an L1 ball around the estimated transition
//! distribution. Execution then walks phases under the planned policy, and
//! the round ends when any in-round visit counter (action or transition)
//! catches up with its historical count.

use std::collections::HashMap;

use rand::Rng;

use crate::estimate::{ConfidenceParams, CounterStore, EstimateSource, LearnedEstimates};
use crate::l1max::{l1_linear_max, L1BallProblem};
use crate::model::GenerativeModel;
use crate::policy::{ActionId, ObsChoice, SeqPolicy};
use crate::state::{ObservationId, PartialState, StateError, StateSpace};
use crate::trace::{AlgorithmKind, RunTrace, StepRow};

/// One state of the phase DAG with its affordable observations and the
/// indices of the resulting states in the next layer.
struct Node {
    psi: PartialState,
    candidates: Vec<(ObservationId, Vec<usize>)>,
}

/// States grouped by domain size, with child links precomputed.
struct PhaseDag {
    layers: Vec<Vec<Node>>,
}

impl PhaseDag {
    fn build(space: &StateSpace, m: usize) -> Self {
        let sets = space.enumerate_obs_sets(m).expect("m <= D");
        let mut states_by_layer: Vec<Vec<PartialState>> = vec![Vec::new(); m + 1];
        for set in sets {
            states_by_layer[set.len()].extend(space.enumerate_partials(set));
        }
        let index_by_layer: Vec<HashMap<PartialState, usize>> = states_by_layer
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .enumerate()
                    .map(|(j, psi)| (psi.clone(), j))
                    .collect()
            })
            .collect();
        let mut layers = Vec::with_capacity(m + 1);
        for (l, layer_states) in states_by_layer.iter().enumerate() {
            let mut nodes = Vec::with_capacity(layer_states.len());
            for psi in layer_states {
                let mut candidates = Vec::new();
                if l < m {
                    for i in space.observation_ids() {
                        if psi.get(i).is_some() {
                            continue;
                        }
                        let children = space
                            .alphabet(i)
                            .iter()
                            .map(|&x| {
                                let next = psi.extend(i, x).expect("id not in domain");
                                index_by_layer[l + 1][&next]
                            })
                            .collect();
                        candidates.push((i, children));
                    }
                }
                nodes.push(Node {
                    psi: psi.clone(),
                    candidates,
                });
            }
            layers.push(nodes);
        }
        Self { layers }
    }
}

/// Output of one round of optimistic dynamic programming.
#[derive(Debug, Clone)]
pub struct OdpPlan {
    /// Optimistic state values `F̂(ψ)` for every planned state.
    pub f_hat: HashMap<PartialState, f64>,
    /// Optimistic values `Q̂(ψ, i)` including the stop choice.
    pub q_hat: HashMap<(PartialState, ObsChoice), f64>,
    pub policy: SeqPolicy,
    /// Time index at the start of the round (1-based).
    pub t_start: u64,
}

impl OdpPlan {
    /// Root value `F̂₀(ψ₀)`.
    pub fn root_value(&self) -> f64 {
        self.f_hat[&PartialState::empty()]
    }
}

/// Runs optimistic dynamic programming from an arbitrary estimate source.
///
/// Terminal layer: `F̂(ψ) = max_a β (r̂ + conf₁)`. Interior layers:
/// `Q̂(ψ, stop)` is the same optimistic action value, `Q̂(ψ, i)` pays `c_i`
/// and takes the L1-optimistic mixture of the children's `F̂`; ties prefer
/// stopping, then the lowest observation id.
pub fn odp_plan_with(
    src: &impl EstimateSource,
    space: &StateSpace,
    costs: &[f64],
    num_actions: usize,
    m: usize,
    beta: f64,
) -> OdpPlan {
    let dag = PhaseDag::build(space, m);
    odp_plan_on_dag(src, &dag, costs, num_actions, beta, 1)
}

fn odp_plan_on_dag(
    src: &impl EstimateSource,
    dag: &PhaseDag,
    costs: &[f64],
    num_actions: usize,
    beta: f64,
    t_start: u64,
) -> OdpPlan {
    let m = dag.layers.len() - 1;
    let mut f_by_layer: Vec<Vec<f64>> = dag
        .layers
        .iter()
        .map(|layer| vec![0.0; layer.len()])
        .collect();
    let mut f_hat = HashMap::new();
    let mut q_hat = HashMap::new();
    let mut obs_fn = HashMap::new();
    let mut action_fn = HashMap::new();

    for l in (0..=m).rev() {
        for (j, node) in dag.layers[l].iter().enumerate() {
            let mut best_a = ActionId::new(1).expect("nonzero");
            let mut best_score = f64::NEG_INFINITY;
            for a in ActionId::all(num_actions) {
                let (est, radius) = src.reward(a, &node.psi);
                // rewards live in [0, 1], so the optimistic mean is capped
                let score = (est + radius).min(1.0);
                if score > best_score {
                    best_score = score;
                    best_a = a;
                }
            }
            let stop_value = beta * best_score;
            action_fn.insert(node.psi.clone(), best_a);
            q_hat.insert((node.psi.clone(), ObsChoice::Stop), stop_value);

            let mut best_choice = ObsChoice::Stop;
            let mut best_value = stop_value;
            for (i, children) in &node.candidates {
                let (p_hat, radius) = src.trans_dist(&node.psi, *i);
                let values: Vec<f64> = children
                    .iter()
                    .map(|&cj| f_by_layer[l + 1][cj])
                    .collect();
                let problem = L1BallProblem::new(p_hat, values, radius)
                    .expect("estimates form a distribution");
                let (_, continuation) = l1_linear_max(&problem);
                let q = continuation - costs[i.index0()];
                q_hat.insert((node.psi.clone(), ObsChoice::Observe(*i)), q);
                if q > best_value {
                    best_value = q;
                    best_choice = ObsChoice::Observe(*i);
                }
            }
            f_by_layer[l][j] = best_value;
            f_hat.insert(node.psi.clone(), best_value);
            obs_fn.insert(node.psi.clone(), best_choice);
        }
    }

    OdpPlan {
        f_hat,
        q_hat,
        policy: SeqPolicy::new(obs_fn, action_fn),
        t_start,
    }
}

/// One observation phase of an executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStep {
    pub phase: usize,
    pub psi: PartialState,
    pub choice: ObsChoice,
    pub cost: f64,
}

/// The full phase walk of one executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLog {
    pub phases: Vec<PhaseStep>,
    pub terminal: (PartialState, ActionId, f64),
}

/// Online state of one Seq-OOS run.
pub struct SeqOos {
    costs: Vec<f64>,
    num_actions: usize,
    m: usize,
    beta: f64,
    params: ConfidenceParams,
    space: StateSpace,
    dag: PhaseDag,
    store: CounterStore,
    rounds: u64,
    plan: Option<OdpPlan>,
}

impl SeqOos {
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
        crate::sim::check_planning_scale(&space, m)?;
        let params = ConfidenceParams::new(&space, m, num_actions, delta);
        let dag = PhaseDag::build(&space, m);
        Ok(Self {
            costs,
            num_actions,
            m,
            beta,
            params,
            space,
            dag,
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

    pub fn current_plan(&self) -> Option<&OdpPlan> {
        self.plan.as_ref()
    }

    pub fn plan_round(&mut self) -> &OdpPlan {
        self.store.begin_round();
        let t_k = self.store.t() + 1;
        let src = LearnedEstimates {
            store: &self.store,
            params: &self.params,
            space: &self.space,
            t_k,
        };
        let plan = odp_plan_on_dag(&src, &self.dag, &self.costs, self.num_actions, self.beta, t_k);
        self.rounds += 1;
        self.plan = Some(plan);
        self.plan.as_ref().expect("just planned")
    }

    /// Executes the planned policy until the doubling rule fires or
    /// `max_steps` steps have been taken. Appends each step's phase walk to
    /// `phase_sink` when one is provided.
    pub fn run_round(
        &mut self,
        env: &GenerativeModel,
        rng: &mut impl Rng,
        max_steps: u64,
        mut phase_sink: Option<&mut Vec<PhaseLog>>,
    ) -> Vec<StepRow> {
        let plan = self.plan.take().expect("round must be planned");
        let mut rows = Vec::new();
        for _ in 0..max_steps {
            let state = env.sample_state(rng);
            let mut psi = PartialState::empty();
            let mut cost = 0.0;
            let mut phases = Vec::new();
            let mut visited_transitions: Vec<(PartialState, ObservationId)> = Vec::new();
            loop {
                let phase = psi.len();
                if phase >= self.m {
                    break;
                }
                let choice = plan
                    .policy
                    .next_obs(&psi)
                    .expect("plan covers every reachable state");
                match choice {
                    ObsChoice::Stop => {
                        phases.push(PhaseStep {
                            phase,
                            psi: psi.clone(),
                            choice,
                            cost: 0.0,
                        });
                        break;
                    }
                    ObsChoice::Observe(i) => {
                        let c = self.costs[i.index0()];
                        let next = psi.extend(i, state.get(i)).expect("plan avoids repeats");
                        self.store
                            .record_seq_phase(&psi, choice, &next)
                            .expect("consistent transition");
                        phases.push(PhaseStep {
                            phase,
                            psi: psi.clone(),
                            choice,
                            cost: c,
                        });
                        visited_transitions.push((psi, i));
                        cost += c;
                        psi = next;
                    }
                }
            }
            let action = plan
                .policy
                .action(&psi)
                .expect("plan covers every reachable state");
            let reward = env.sample_reward(action, &state, rng);
            // Terminal bookkeeping reuses the simultaneous update: the step's
            // observation set is the terminal domain, and the reward lands on
            // the exact (action, terminal state) pair.
            self.store
                .record_sim_step(psi.domain(), &psi, action, reward)
                .expect("domain matches by construction");
            rows.push(StepRow {
                t: self.store.t(),
                observed: psi.domain(),
                psi: psi.clone(),
                cost,
                action,
                reward,
            });
            if let Some(sink) = phase_sink.as_deref_mut() {
                sink.push(PhaseLog {
                    phases: phases.clone(),
                    terminal: (psi.clone(), action, reward),
                });
            }

            // Doubling rule over both counter families.
            let nu = self.store.nu_act(action, &psi);
            let mut done = nu >= (self.store.n_act(action, &psi) - nu).max(1);
            for (from, i) in &visited_transitions {
                let nu = self.store.nu_trans(from, *i);
                if nu >= (self.store.n_trans_pair(from, *i) - nu).max(1) {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
        self.plan = Some(plan);
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
        Self::run_with_logs(env, m, beta, delta, horizon, rng, None)
    }

    /// Like [`SeqOos::run`], also collecting per-step phase walks when a sink
    /// is provided.
    pub fn run_with_logs(
        env: &GenerativeModel,
        m: usize,
        beta: f64,
        delta: f64,
        horizon: u64,
        rng: &mut impl Rng,
        mut phase_sink: Option<&mut Vec<PhaseLog>>,
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
            let segment = algo.run_round(
                env,
                rng,
                horizon - rows.len() as u64,
                phase_sink.as_deref_mut(),
            );
            rows.extend(segment);
        }
        RunTrace {
            algorithm: AlgorithmKind::SeqOos,
            rows,
            rounds: algo.rounds,
        }
    }
}
