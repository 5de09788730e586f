//! Per-step run traces and the gain / regret summaries computed from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::policy::ActionId;
use crate::state::{ObservationSet, PartialState};

/// The algorithms the harness can run; the string forms are the config and
/// CSV spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    SimOos,
    SeqOos,
    ContextualUcb,
    MetaUcb,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::SimOos => "sim-oos",
            AlgorithmKind::SeqOos => "seq-oos",
            AlgorithmKind::ContextualUcb => "contextual-ucb",
            AlgorithmKind::MetaUcb => "meta-ucb",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim-oos" => Ok(AlgorithmKind::SimOos),
            "seq-oos" => Ok(AlgorithmKind::SeqOos),
            "contextual-ucb" => Ok(AlgorithmKind::ContextualUcb),
            "meta-ucb" => Ok(AlgorithmKind::MetaUcb),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

/// One executed step: what was observed, what it cost, what was played and
/// what came back.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    /// 1-based step index.
    pub t: u64,
    /// Observations purchased this step.
    pub observed: ObservationSet,
    /// Revealed partial state.
    pub psi: PartialState,
    /// Total observation cost paid this step.
    pub cost: f64,
    pub action: ActionId,
    pub reward: f64,
}

/// A complete run: one row per step plus the number of planning rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: AlgorithmKind,
    pub rows: Vec<StepRow>,
    pub rounds: u64,
}

impl RunTrace {
    pub fn horizon(&self) -> u64 {
        self.rows.len() as u64
    }
}

/// Time-averaged realized gain: `(1/T) Σ_t (β r_t − cost_t)`.
pub fn compute_gain(trace: &RunTrace, beta: f64) -> f64 {
    let total = gain_total(&trace.rows, beta);
    total / trace.rows.len() as f64
}

/// Cumulative β-reward minus cost over a slice of rows.
pub fn gain_total(rows: &[StepRow], beta: f64) -> f64 {
    let mut total = 0.0;
    for row in rows {
        total += beta * row.reward - row.cost;
    }
    total
}

/// Realized regret against an oracle per-step value:
/// `T · oracle_value − Σ_t (β r_t − cost_t)`.
pub fn compute_regret(trace: &RunTrace, oracle_value: f64, beta: f64) -> f64 {
    let t = trace.rows.len() as f64;
    t * oracle_value - gain_total(&trace.rows, beta)
}
