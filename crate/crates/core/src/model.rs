//! Ground-truth generative model: joint state distribution, mean rewards,
//! observation costs, samplers and exact marginalization.
//!
//! The joint distribution is stored as a dense table over all state vectors
//! (desk scale by design). Models are immutable after construction and safe to
//! share across concurrent runs; each run owns its own RNG stream.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{ActionId, ObsChoice};
use crate::state::{
    ObservationId, ObservationSet, PartialState, StateError, StateSpace, StateVector,
};

/// Tolerance for the joint distribution summing to one.
const JOINT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("joint table has {got} entries, expected {expected}")]
    JointLength { got: usize, expected: usize },
    #[error("joint entry {index} = {value} is not a probability")]
    JointEntry { index: usize, value: f64 },
    #[error("joint sums to {sum}, not 1")]
    JointSum { sum: f64 },
    #[error("model must have at least one action")]
    NoActions,
    #[error("reward table has {got} rows, expected one per action ({expected})")]
    RewardRows { got: usize, expected: usize },
    #[error("reward row {row} has {got} entries, expected {expected}")]
    RewardRowLength { row: usize, got: usize, expected: usize },
    #[error("mean reward for action {action}, state {state} is {value}, outside [0, 1]")]
    RewardRange { action: usize, state: usize, value: f64 },
    #[error("cost vector has {got} entries, expected {expected}")]
    CostLength { got: usize, expected: usize },
    #[error("cost of observation {index} is {value}; costs must be finite and non-negative")]
    CostRange { index: usize, value: f64 },
    #[error("conditioning on zero-probability partial state {0}")]
    ZeroProbability(PartialState),
    #[error("synthetic spec: {0}")]
    BadSyntheticSpec(String),
    #[error("failed to read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse model file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Distribution family of the observed reward around its mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardNoise {
    /// Reward is 1 with probability `r̄`, else 0.
    #[default]
    Bernoulli,
    /// Reward is uniform on `[r̄ − w, r̄ + w]` with `w = min(r̄, 1 − r̄)`.
    TruncatedUniform,
}

/// Joint state distribution, mean-reward table and per-observation costs.
#[derive(Debug, Clone)]
pub struct GenerativeModel {
    space: StateSpace,
    num_actions: usize,
    joint: Vec<f64>,
    cdf: Vec<f64>,
    /// Row-major `A × S` table of mean rewards in `[0, 1]`.
    mean_reward: Vec<f64>,
    costs: Vec<f64>,
    noise: RewardNoise,
}

impl GenerativeModel {
    pub fn new(
        space: StateSpace,
        num_actions: usize,
        joint: Vec<f64>,
        mean_reward: Vec<Vec<f64>>,
        costs: Vec<f64>,
        noise: RewardNoise,
    ) -> Result<Self, ModelError> {
        let s = space.num_states();
        if joint.len() != s {
            return Err(ModelError::JointLength {
                got: joint.len(),
                expected: s,
            });
        }
        let mut sum = 0.0;
        for (i, &p) in joint.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0 + JOINT_TOL).contains(&p) {
                return Err(ModelError::JointEntry { index: i, value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > JOINT_TOL {
            return Err(ModelError::JointSum { sum });
        }
        if num_actions == 0 {
            return Err(ModelError::NoActions);
        }
        if mean_reward.len() != num_actions {
            return Err(ModelError::RewardRows {
                got: mean_reward.len(),
                expected: num_actions,
            });
        }
        let mut flat = Vec::with_capacity(num_actions * s);
        for (a, row) in mean_reward.iter().enumerate() {
            if row.len() != s {
                return Err(ModelError::RewardRowLength {
                    row: a + 1,
                    got: row.len(),
                    expected: s,
                });
            }
            for (i, &r) in row.iter().enumerate() {
                if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                    return Err(ModelError::RewardRange {
                        action: a + 1,
                        state: i,
                        value: r,
                    });
                }
                flat.push(r);
            }
        }
        if costs.len() != space.d() {
            return Err(ModelError::CostLength {
                got: costs.len(),
                expected: space.d(),
            });
        }
        for (i, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(ModelError::CostRange {
                    index: i + 1,
                    value: c,
                });
            }
        }
        let mut cdf = Vec::with_capacity(s);
        let mut acc = 0.0;
        for &p in &joint {
            acc += p;
            cdf.push(acc);
        }
        // guard the binary search against rounding drift at the top
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            space,
            num_actions,
            joint,
            cdf,
            mean_reward: flat,
            costs,
            noise,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        ActionId::all(self.num_actions)
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn noise(&self) -> RewardNoise {
        self.noise
    }

    pub fn cost_of(&self, id: ObservationId) -> f64 {
        self.costs[id.index0()]
    }

    /// Total cost of purchasing every observation in `set`.
    pub fn obs_cost(&self, set: ObservationSet) -> f64 {
        set.ids().map(|id| self.costs[id.index0()]).sum()
    }

    /// The same model with a different cost vector.
    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Self, ModelError> {
        if costs.len() != self.space.d() {
            return Err(ModelError::CostLength {
                got: costs.len(),
                expected: self.space.d(),
            });
        }
        for (i, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(ModelError::CostRange {
                    index: i + 1,
                    value: c,
                });
            }
        }
        let mut out = self.clone();
        out.costs = costs;
        Ok(out)
    }

    /// The same model with every observation costing `c`.
    pub fn with_uniform_cost(&self, c: f64) -> Result<Self, ModelError> {
        self.with_costs(vec![c; self.space.d()])
    }

    pub fn mean_reward(&self, action: ActionId, state: &StateVector) -> f64 {
        let idx = self.space.state_index(state);
        self.mean_reward[action.index0() * self.space.num_states() + idx]
    }

    fn mean_reward_at(&self, action: ActionId, state_idx: usize) -> f64 {
        self.mean_reward[action.index0() * self.space.num_states() + state_idx]
    }

    /// Draws a state vector from the joint distribution.
    pub fn sample_state(&self, rng: &mut impl Rng) -> StateVector {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.space.state_at(idx.min(self.space.num_states() - 1))
    }

    /// Draws a reward with mean `r̄(action, state)` from the model's noise
    /// family; the support is always within `[0, 1]`.
    pub fn sample_reward(
        &self,
        action: ActionId,
        state: &StateVector,
        rng: &mut impl Rng,
    ) -> f64 {
        let mean = self.mean_reward(action, state);
        match self.noise {
            RewardNoise::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardNoise::TruncatedUniform => {
                let w = mean.min(1.0 - mean);
                let u: f64 = rng.random();
                mean + w * (2.0 * u - 1.0)
            }
        }
    }

    /// Iterates the row-major indices of all state vectors consistent with
    /// `psi`, in ascending order.
    fn for_each_consistent(&self, psi: &PartialState, mut f: impl FnMut(usize)) {
        let d = self.space.d();
        let mut base = 0usize;
        let mut free: Vec<(usize, usize)> = Vec::new(); // (stride, alphabet len)
        let mut stride = 1usize;
        // strides computed right-to-left; collect fixed contribution and free slots
        let mut strides = vec![0usize; d];
        for (i, s) in strides.iter_mut().enumerate().rev() {
            *s = stride;
            stride *= self.space.alphabets()[i].len();
        }
        for (i, &stride_i) in strides.iter().enumerate() {
            let id = ObservationId::new(i + 1).expect("nonzero");
            match psi.get(id) {
                Some(x) => {
                    let pos = self
                        .space
                        .symbol_pos(id, x)
                        .unwrap_or_else(|| panic!("symbol {x} not in alphabet of {id}"));
                    base += pos * stride_i;
                }
                None => free.push((stride_i, self.space.alphabets()[i].len())),
            }
        }
        let total: usize = free.iter().map(|&(_, k)| k).product();
        for k in 0..total {
            let mut rem = k;
            let mut idx = base;
            for &(stride, len) in free.iter().rev() {
                idx += (rem % len) * stride;
                rem /= len;
            }
            f(idx);
        }
    }

    /// Marginal probability `p(ψ) = Pr(Φ ∼ ψ)`.
    pub fn marginal_prob(&self, psi: &PartialState) -> f64 {
        let mut sum = 0.0;
        self.for_each_consistent(psi, |idx| sum += self.joint[idx]);
        sum
    }

    /// Marginal expected reward `r̄(a, ψ) = E[r̄(a, Φ) | Φ ∼ ψ]`.
    pub fn marginal_reward(&self, action: ActionId, psi: &PartialState) -> Result<f64, ModelError> {
        let mut prob = 0.0;
        let mut weighted = 0.0;
        self.for_each_consistent(psi, |idx| {
            prob += self.joint[idx];
            weighted += self.joint[idx] * self.mean_reward_at(action, idx);
        });
        if prob <= 0.0 {
            return Err(ModelError::ZeroProbability(psi.clone()));
        }
        Ok(weighted / prob)
    }

    /// Partial state transition probability `p(ψ' | ψ, i)`.
    ///
    /// For `Observe(i)` with `i ∉ dom(ψ)` and `ψ'` a one-step extension of
    /// `ψ` by `i`, this is `Pr(Φ(i) = ψ'(i) | Φ ∼ ψ)`; observing an id
    /// already in the domain has probability 0 everywhere. `Stop` keeps the
    /// state fixed with probability 1. Requires `p(ψ) > 0` for `Observe`.
    pub fn transition_prob(
        &self,
        psi: &PartialState,
        choice: ObsChoice,
        next: &PartialState,
    ) -> f64 {
        match choice {
            ObsChoice::Stop => {
                if next == psi {
                    1.0
                } else {
                    0.0
                }
            }
            ObsChoice::Observe(i) => {
                if psi.get(i).is_some() {
                    return 0.0;
                }
                let Some(x) = next.get(i) else { return 0.0 };
                match psi.extend(i, x) {
                    Ok(extended) if &extended == next => {
                        let p_psi = self.marginal_prob(psi);
                        if p_psi <= 0.0 {
                            0.0
                        } else {
                            self.marginal_prob(next) / p_psi
                        }
                    }
                    _ => 0.0,
                }
            }
        }
    }
}

/// Serialized form of a model: a structured text file with the alphabets,
/// the dense joint table in row-major enumeration order, the `A × S` reward
/// table, the cost vector and the reward noise family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alphabets: Vec<Vec<i32>>,
    pub joint: Vec<f64>,
    pub mean_reward: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
    #[serde(default)]
    pub reward_noise: RewardNoise,
}

impl ModelFile {
    pub fn from_model(model: &GenerativeModel) -> Self {
        let s = model.space.num_states();
        Self {
            alphabets: model.space.alphabets().to_vec(),
            joint: model.joint.clone(),
            mean_reward: (0..model.num_actions)
                .map(|a| model.mean_reward[a * s..(a + 1) * s].to_vec())
                .collect(),
            costs: model.costs.clone(),
            reward_noise: model.noise,
        }
    }

    pub fn into_model(self) -> Result<GenerativeModel, ModelError> {
        let space = StateSpace::new(self.alphabets)?;
        let num_actions = self.mean_reward.len();
        GenerativeModel::new(
            space,
            num_actions,
            self.joint,
            self.mean_reward,
            self.costs,
            self.reward_noise,
        )
    }
}

/// Writes a model to a JSON file. Floating-point values round-trip exactly.
pub fn save_model(model: &GenerativeModel, path: &Path) -> Result<(), ModelError> {
    let file = ModelFile::from_model(model);
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<GenerativeModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.into_model()
}

fn default_sizes() -> Vec<usize> {
    vec![3, 2, 3, 2]
}

fn default_correlation() -> f64 {
    0.6
}

fn default_actions() -> usize {
    4
}

/// Recipe for the synthetic correlated-observation model used by the
/// experiment presets (a stand-in for clinical data that cannot ship with the
/// repository).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    #[serde(default = "default_sizes")]
    pub alphabet_sizes: Vec<usize>,
    /// Mixing weight of the shared latent class in each observation's
    /// distribution; 0 makes the observations independent.
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    #[serde(default = "default_actions")]
    pub actions: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            alphabet_sizes: default_sizes(),
            correlation: default_correlation(),
            actions: default_actions(),
        }
    }
}

/// Builds a synthetic model with correlated observations and action-dependent
/// rewards in which the best action depends on the state, so observations
/// carry value.
///
/// Construction: a binary latent class tilts each observation's marginal
/// (mixing weight = `correlation`), making observations mutually informative.
/// Each action's mean reward responds linearly to per-observation scores with
/// weights that halve from one observation to the next; the last observation
/// has weight zero, so it never affects rewards even though it is correlated
/// with the others and costs money to observe.
pub fn synthetic_medical(spec: &SyntheticSpec) -> Result<GenerativeModel, ModelError> {
    if spec.alphabet_sizes.is_empty() {
        return Err(ModelError::BadSyntheticSpec(
            "alphabet_sizes must be non-empty".into(),
        ));
    }
    if spec.alphabet_sizes.contains(&0) {
        return Err(ModelError::BadSyntheticSpec(
            "alphabet sizes must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.correlation) {
        return Err(ModelError::BadSyntheticSpec(format!(
            "correlation {} outside [0, 1]",
            spec.correlation
        )));
    }
    if spec.actions == 0 {
        return Err(ModelError::BadSyntheticSpec("actions must be at least 1".into()));
    }
    let space = StateSpace::with_sizes(&spec.alphabet_sizes)?;
    let d = space.d();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let draw_dist = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| 0.2 + rng.random::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / sum).collect()
    };

    // Per observation: a base distribution plus one tilt per latent class.
    let gamma = spec.correlation;
    let mut cond = Vec::with_capacity(d); // cond[i][z][symbol]
    for &k in &spec.alphabet_sizes {
        let base = draw_dist(&mut rng, k);
        let tilt0 = draw_dist(&mut rng, k);
        let tilt1 = draw_dist(&mut rng, k);
        let mix = |tilt: &[f64]| -> Vec<f64> {
            base.iter()
                .zip(tilt)
                .map(|(b, t)| (1.0 - gamma) * b + gamma * t)
                .collect()
        };
        cond.push([mix(&tilt0), mix(&tilt1)]);
    }

    let s = space.num_states();
    let mut joint = vec![0.0f64; s];
    for (idx, p) in joint.iter_mut().enumerate() {
        let state = space.state_at(idx);
        let mut by_class = [0.5f64, 0.5f64];
        for (i, &x) in state.values().iter().enumerate() {
            let pos = space
                .symbol_pos(ObservationId::new(i + 1).expect("nonzero"), x)
                .expect("symbol from enumeration");
            by_class[0] *= cond[i][0][pos];
            by_class[1] *= cond[i][1][pos];
        }
        *p = by_class[0] + by_class[1];
    }
    let total: f64 = joint.iter().sum();
    for p in &mut joint {
        *p /= total;
    }

    // Reward weights halve per observation; the last observation is inert.
    let mut weights: Vec<f64> = (0..d).map(|i| 0.5f64.powi(i as i32)).collect();
    if d >= 2 {
        weights[d - 1] = 0.0;
    }
    let weight_sum: f64 = weights.iter().sum();

    // Centered per-symbol scores in [-1, 1].
    let scores: Vec<Vec<f64>> = spec
        .alphabet_sizes
        .iter()
        .map(|&k| {
            (0..k)
                .map(|j| {
                    if k == 1 {
                        0.0
                    } else {
                        2.0 * j as f64 / (k - 1) as f64 - 1.0
                    }
                })
                .collect()
        })
        .collect();

    let coeffs: Vec<Vec<f64>> = (0..spec.actions)
        .map(|_| (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect())
        .collect();

    let mut mean_reward = Vec::with_capacity(spec.actions);
    for coeff in &coeffs {
        let mut row = Vec::with_capacity(s);
        for idx in 0..s {
            let state = space.state_at(idx);
            let mut signal = 0.0;
            for (i, &x) in state.values().iter().enumerate() {
                let pos = space
                    .symbol_pos(ObservationId::new(i + 1).expect("nonzero"), x)
                    .expect("symbol from enumeration");
                signal += weights[i] * coeff[i] * scores[i][pos];
            }
            row.push(0.5 + 0.45 * signal / weight_sum);
        }
        mean_reward.push(row);
    }

    GenerativeModel::new(
        space,
        spec.actions,
        joint,
        mean_reward,
        vec![0.0; d],
        RewardNoise::Bernoulli,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(i: usize) -> ObservationId {
        ObservationId::new(i).unwrap()
    }

    fn act(a: usize) -> ActionId {
        ActionId::new(a).unwrap()
    }

    fn psi(entries: &[(usize, i32)]) -> PartialState {
        PartialState::new(entries.iter().map(|&(i, x)| (obs(i), x))).unwrap()
    }

    /// Two binary observations; joint and rewards from the worked examples.
    fn two_obs_model() -> GenerativeModel {
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        GenerativeModel::new(
            space,
            1,
            vec![0.4, 0.1, 0.25, 0.25],
            vec![vec![1.0, 0.0, 0.5, 0.5]],
            vec![0.0, 0.0],
            RewardNoise::Bernoulli,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_tables() {
        let space = StateSpace::with_sizes(&[2]).unwrap();
        assert!(matches!(
            GenerativeModel::new(
                space.clone(),
                1,
                vec![0.5, 0.6],
                vec![vec![0.0, 0.0]],
                vec![0.0],
                RewardNoise::Bernoulli
            ),
            Err(ModelError::JointSum { .. })
        ));
        assert!(matches!(
            GenerativeModel::new(
                space.clone(),
                1,
                vec![0.5, 0.5],
                vec![vec![1.5, 0.0]],
                vec![0.0],
                RewardNoise::Bernoulli
            ),
            Err(ModelError::RewardRange { .. })
        ));
        assert!(matches!(
            GenerativeModel::new(
                space,
                1,
                vec![0.5, 0.5],
                vec![vec![1.0, 0.0]],
                vec![-0.1],
                RewardNoise::Bernoulli
            ),
            Err(ModelError::CostRange { .. })
        ));
    }

    #[test]
    fn point_mass_always_samples_the_same_state() {
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        let model = GenerativeModel::new(
            space,
            1,
            vec![0.0, 1.0, 0.0, 0.0],
            vec![vec![0.5; 4]],
            vec![0.0, 0.0],
            RewardNoise::Bernoulli,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(model.sample_state(&mut rng), StateVector::new(vec![0, 1]));
        }
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        let model = GenerativeModel::new(
            space,
            1,
            vec![0.25; 4],
            vec![vec![0.5; 4]],
            vec![0.0, 0.0],
            RewardNoise::Bernoulli,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let s = model.sample_state(&mut rng);
            counts[model.space().state_index(&s)] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.25).abs() < 0.01, "freq={freq}");
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let model = two_obs_model();
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            assert_eq!(model.sample_state(&mut a), model.sample_state(&mut b));
        }
    }

    #[test]
    fn reward_sampling_edges_and_mean() {
        let space = StateSpace::with_sizes(&[1]).unwrap();
        let mk = |r: f64| {
            GenerativeModel::new(
                space.clone(),
                1,
                vec![1.0],
                vec![vec![r]],
                vec![0.0],
                RewardNoise::Bernoulli,
            )
            .unwrap()
        };
        let phi = StateVector::new(vec![0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(mk(1.0).sample_reward(act(1), &phi, &mut rng), 1.0);
            assert_eq!(mk(0.0).sample_reward(act(1), &phi, &mut rng), 0.0);
        }
        let model = mk(0.3);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| model.sample_reward(act(1), &phi, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.3).abs() < 0.005, "mean={mean}");
    }

    #[test]
    fn truncated_uniform_bounds_and_mean() {
        let space = StateSpace::with_sizes(&[1]).unwrap();
        let model = GenerativeModel::new(
            space,
            1,
            vec![1.0],
            vec![vec![0.3]],
            vec![0.0],
            RewardNoise::TruncatedUniform,
        )
        .unwrap();
        let phi = StateVector::new(vec![0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let r = model.sample_reward(act(1), &phi, &mut rng);
            assert!((0.0..=0.6).contains(&r));
            sum += r;
        }
        assert!((sum / n as f64 - 0.3).abs() < 0.005);
    }

    #[test]
    fn marginal_prob_examples() {
        let model = two_obs_model();
        assert!((model.marginal_prob(&PartialState::empty()) - 1.0).abs() < 1e-15);
        assert!((model.marginal_prob(&psi(&[(1, 0)])) - 0.5).abs() < 1e-15);
        let full = psi(&[(1, 0), (2, 1)]);
        assert!((model.marginal_prob(&full) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn marginal_reward_examples() {
        let model = two_obs_model();
        let r = model.marginal_reward(act(1), &psi(&[(1, 0)])).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        let exact = model
            .marginal_reward(act(1), &psi(&[(1, 0), (2, 0)]))
            .unwrap();
        assert!((exact - 1.0).abs() < 1e-15);

        // conditioning on an impossible state errors
        let space = StateSpace::with_sizes(&[2]).unwrap();
        let degenerate = GenerativeModel::new(
            space,
            1,
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5]],
            vec![0.0],
            RewardNoise::Bernoulli,
        )
        .unwrap();
        assert!(matches!(
            degenerate.marginal_reward(act(1), &psi(&[(1, 1)])),
            Err(ModelError::ZeroProbability(_))
        ));
    }

    #[test]
    fn constant_reward_marginalizes_to_itself() {
        let space = StateSpace::with_sizes(&[2, 2]).unwrap();
        let model = GenerativeModel::new(
            space,
            1,
            vec![0.4, 0.1, 0.25, 0.25],
            vec![vec![0.7; 4]],
            vec![0.0, 0.0],
            RewardNoise::Bernoulli,
        )
        .unwrap();
        for set in model.space().enumerate_obs_sets(2).unwrap() {
            for p in model.space().enumerate_partials(set) {
                assert!((model.marginal_reward(act(1), &p).unwrap() - 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transition_prob_examples() {
        let model = two_obs_model();
        let from = psi(&[(1, 0)]);
        let to = psi(&[(1, 0), (2, 1)]);
        let p = model.transition_prob(&from, ObsChoice::Observe(obs(2)), &to);
        assert!((p - 0.2).abs() < 1e-12);

        assert_eq!(model.transition_prob(&from, ObsChoice::Stop, &from), 1.0);
        assert_eq!(model.transition_prob(&from, ObsChoice::Stop, &to), 0.0);
        // already-observed id has probability 0 everywhere
        assert_eq!(
            model.transition_prob(&from, ObsChoice::Observe(obs(1)), &to),
            0.0
        );
        // not a one-step extension
        let unrelated = psi(&[(2, 1)]);
        assert_eq!(
            model.transition_prob(&from, ObsChoice::Observe(obs(2)), &unrelated),
            0.0
        );
    }

    #[test]
    fn marginals_sum_to_one_over_each_domain() {
        let model = two_obs_model();
        for set in model.space().enumerate_obs_sets(2).unwrap() {
            let total: f64 = model
                .space()
                .enumerate_partials(set)
                .iter()
                .map(|p| model.marginal_prob(p))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "set {set}: {total}");
        }
    }

    #[test]
    fn chain_rule_and_tower_property() {
        let model = synthetic_medical(&SyntheticSpec {
            seed: 11,
            alphabet_sizes: vec![2, 3, 2],
            correlation: 0.7,
            actions: 2,
        })
        .unwrap();
        let space = model.space().clone();
        for set in space.enumerate_obs_sets(2).unwrap() {
            for p in space.enumerate_partials(set) {
                let p_psi = model.marginal_prob(&p);
                if p_psi <= 0.0 {
                    continue;
                }
                for i in space.observation_ids() {
                    if p.get(i).is_some() {
                        continue;
                    }
                    // chain rule over the extensions
                    for &x in space.alphabet(i) {
                        let ext = p.extend(i, x).unwrap();
                        let lhs = model.marginal_prob(&ext);
                        let rhs =
                            p_psi * model.transition_prob(&p, ObsChoice::Observe(i), &ext);
                        assert!((lhs - rhs).abs() < 1e-12);
                    }
                    // tower property of marginal rewards
                    for a in model.actions() {
                        let direct = model.marginal_reward(a, &p).unwrap();
                        let mut mixed = 0.0;
                        for &x in space.alphabet(i) {
                            let ext = p.extend(i, x).unwrap();
                            let w = model.transition_prob(&p, ObsChoice::Observe(i), &ext);
                            if w > 0.0 {
                                mixed += w * model.marginal_reward(a, &ext).unwrap();
                            }
                        }
                        assert!((direct - mixed).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn synthetic_defaults_are_valid_and_reproducible() {
        let model = synthetic_medical(&SyntheticSpec::default()).unwrap();
        assert_eq!(model.space().d(), 4);
        assert_eq!(model.num_actions(), 4);
        let sum: f64 = model.joint().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let again = synthetic_medical(&SyntheticSpec::default()).unwrap();
        assert_eq!(model.joint(), again.joint());
    }

    #[test]
    fn synthetic_zero_correlation_factorizes() {
        let spec = SyntheticSpec {
            seed: 5,
            alphabet_sizes: vec![2, 3, 2],
            correlation: 0.0,
            actions: 2,
        };
        let model = synthetic_medical(&spec).unwrap();
        let space = model.space();
        for idx in 0..space.num_states() {
            let state = space.state_at(idx);
            let mut product = 1.0;
            for i in space.observation_ids() {
                let single = PartialState::new([(i, state.get(i))]).unwrap();
                product *= model.marginal_prob(&single);
            }
            assert!((model.joint()[idx] - product).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_rejects_bad_specs() {
        let bad_size = SyntheticSpec {
            alphabet_sizes: vec![2, 0],
            ..SyntheticSpec::default()
        };
        assert!(synthetic_medical(&bad_size).is_err());
        let bad_corr = SyntheticSpec {
            correlation: 1.5,
            ..SyntheticSpec::default()
        };
        assert!(synthetic_medical(&bad_corr).is_err());
    }

    #[test]
    fn model_file_roundtrip_is_exact() {
        let model = synthetic_medical(&SyntheticSpec::default()).unwrap();
        let dir = std::env::temp_dir().join("obs_bandits_model_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model.joint(), loaded.joint());
        assert_eq!(model.costs(), loaded.costs());
        assert_eq!(model.space(), loaded.space());
        assert_eq!(model.mean_reward, loaded.mean_reward);
        std::fs::remove_file(&path).ok();
    }
}
