//! Contextual multi-armed bandits where context features must be purchased.
//!
//! Each step the environment draws a hidden state vector; the decision maker
//! buys a subset of its entries (each observation has a known cost), then
//! picks an action whose reward depends on the full state. The library
//! provides:
//!
//! - the combinatorial algebra of partial states ([`state`]);
//! - ground-truth models with exact marginalization and samplers ([`model`]);
//! - exact oracles for both the fixed-set and the sequential protocol
//!   ([`oracle`]);
//! - two optimistic learners — round-based simultaneous selection ([`sim`])
//!   and sequential selection via optimistic dynamic programming ([`seq`]) —
//!   built on shared counters and confidence radii ([`estimate`]) and a
//!   shared L1-ball inner maximizer ([`l1max`]);
//! - baselines ([`baselines`]) and a reproducible experiment harness
//!   ([`config`], [`experiment`]) behind the `obs-bandits` CLI.

pub mod baselines;
pub mod config;
pub mod estimate;
pub mod experiment;
pub mod l1max;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod seq;
pub mod sim;
pub mod state;
pub mod trace;

pub use config::ExperimentConfig;
pub use estimate::{conf1, conf2_seq, conf2_sim, ConfidenceParams, CounterStore};
pub use l1max::{l1_linear_max, L1BallProblem};
pub use model::{GenerativeModel, RewardNoise, SyntheticSpec};
pub use oracle::{oracle_seq, oracle_sim, OracleResult};
pub use policy::{ActionId, ObsChoice, SeqPolicy, SimPolicy};
pub use seq::SeqOos;
pub use sim::SimOos;
pub use state::{ObservationId, ObservationSet, PartialState, StateSpace, StateVector};
pub use trace::{compute_gain, compute_regret, AlgorithmKind, RunTrace, StepRow};
