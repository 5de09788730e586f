//! Full and partial state vectors, observation sets, and their enumeration.
//!
//! A *state vector* holds one symbol per observation. A *partial state* is a
//! state vector with some entries missing: it records only the observations
//! that were actually purchased. All types here are immutable values with
//! canonical internal ordering, so equality, hashing and enumeration order are
//! deterministic and runs are reproducible bit-for-bit.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Hard cap on the number of observations; observation sets are bitmasks.
pub const MAX_OBSERVATIONS: usize = 32;

/// Upper bound on the dense state-vector table a model may carry.
pub const MAX_STATES: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("observation ids are 1-based; 0 is not a valid id")]
    ZeroObservationId,
    #[error("observation id {id} out of range for {d} observations")]
    IdOutOfRange { id: usize, d: usize },
    #[error("observation {id} is already present in the partial state")]
    DuplicateObservation { id: usize },
    #[error("symbol {symbol} is not in the alphabet of observation {id}")]
    SymbolNotInAlphabet { id: usize, symbol: i32 },
    #[error("at most {MAX_OBSERVATIONS} observations are supported, got {d}")]
    TooManyObservations { d: usize },
    #[error("observation {id} has an empty alphabet")]
    EmptyAlphabet { id: usize },
    #[error("state space has more than {MAX_STATES} state vectors")]
    StateSpaceTooLarge,
    #[error("{count} partial states reachable under the budget; explicit planning is capped at {limit}")]
    PlanningSpaceTooLarge { count: f64, limit: f64 },
    #[error("state vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("budget m={m} exceeds the number of observations {d}")]
    BudgetExceedsObservations { m: usize, d: usize },
}

/// 1-based index of an observation (an element of the observation set `1..=D`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationId(usize);

impl ObservationId {
    pub fn new(index: usize) -> Result<Self, StateError> {
        if index == 0 {
            return Err(StateError::ZeroObservationId);
        }
        Ok(Self(index))
    }

    /// The 1-based index.
    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based index for table lookups.
    pub fn index0(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Debug for ObservationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "obs{}", self.0)
    }
}

impl fmt::Display for ObservationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of observation ids, stored as a bitmask.
///
/// Ordering is by cardinality first, then lexicographically on the ascending
/// id sequence; this is the canonical tie-breaking order used by the planners
/// and oracles ("smaller set first, then lexicographic").
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ObservationSet {
    mask: u32,
}

impl ObservationSet {
    pub const EMPTY: Self = Self { mask: 0 };

    pub fn empty() -> Self {
        Self::EMPTY
    }

    pub fn from_ids<I: IntoIterator<Item = ObservationId>>(ids: I) -> Self {
        let mut set = Self::EMPTY;
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn insert(&mut self, id: ObservationId) {
        debug_assert!(id.index0() < MAX_OBSERVATIONS);
        self.mask |= 1 << id.index0();
    }

    pub fn with(mut self, id: ObservationId) -> Self {
        self.insert(id);
        self
    }

    pub fn contains(&self, id: ObservationId) -> bool {
        id.index0() < MAX_OBSERVATIONS && self.mask & (1 << id.index0()) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask & !other.mask == 0
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = ObservationId> + '_ {
        let mask = self.mask;
        (0..MAX_OBSERVATIONS)
            .filter(move |b| mask & (1 << b) != 0)
            .map(|b| ObservationId(b + 1))
    }

    pub fn max_id(&self) -> Option<ObservationId> {
        if self.mask == 0 {
            None
        } else {
            Some(ObservationId(32 - self.mask.leading_zeros() as usize))
        }
    }
}

impl PartialOrd for ObservationSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObservationSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.mask ^ other.mask;
            if diff == 0 {
                Ordering::Equal
            } else {
                // Equal cardinality: the set owning the smallest differing id
                // is lexicographically smaller.
                let low = diff & diff.wrapping_neg();
                if self.mask & low != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        })
    }
}

impl fmt::Debug for ObservationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ObservationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.ids().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

/// A fully observed state vector: one symbol per observation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector {
    values: Vec<i32>,
}

impl StateVector {
    pub fn new(values: Vec<i32>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    /// Symbol of observation `id`. Panics if `id` is out of range.
    pub fn get(&self, id: ObservationId) -> i32 {
        assert!(
            id.index0() < self.values.len(),
            "observation id {} out of range for D={}",
            id,
            self.values.len()
        );
        self.values[id.index0()]
    }

    /// The partial state revealing exactly the observations in `set`.
    pub fn restrict(&self, set: ObservationSet) -> PartialState {
        let entries = set
            .ids()
            .map(|id| {
                assert!(
                    id.index0() < self.values.len(),
                    "observation id {} out of range for D={}",
                    id,
                    self.values.len()
                );
                (id, self.values[id.index0()])
            })
            .collect();
        PartialState { entries }
    }

    /// The partial state with every observation revealed.
    pub fn to_partial(&self) -> PartialState {
        let entries = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &x)| (ObservationId(i + 1), x))
            .collect();
        PartialState { entries }
    }

    /// True iff this state agrees with `psi` on the whole domain of `psi`.
    pub fn consistent_with(&self, psi: &PartialState) -> bool {
        psi.entries.iter().all(|&(id, x)| {
            assert!(
                id.index0() < self.values.len(),
                "observation id {} out of range for D={}",
                id,
                self.values.len()
            );
            self.values[id.index0()] == x
        })
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A state vector with missing entries: maps a subset of observation ids to
/// symbols. Entries are kept sorted by id, so derived equality, hashing and
/// ordering are canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialState {
    entries: Vec<(ObservationId, i32)>,
}

impl PartialState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a partial state from (id, symbol) pairs; rejects duplicate ids.
    pub fn new<I: IntoIterator<Item = (ObservationId, i32)>>(
        entries: I,
    ) -> Result<Self, StateError> {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by_key(|&(id, _)| id);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(StateError::DuplicateObservation { id: w[0].0.get() });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(ObservationId, i32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The set of observations with a present entry.
    pub fn domain(&self) -> ObservationSet {
        ObservationSet::from_ids(self.entries.iter().map(|&(id, _)| id))
    }

    pub fn get(&self, id: ObservationId) -> Option<i32> {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .ok()
            .map(|k| self.entries[k].1)
    }

    /// Extends the partial state with a new entry. Extending an id that is
    /// already present is an error (it signals a planner bug).
    pub fn extend(&self, id: ObservationId, symbol: i32) -> Result<Self, StateError> {
        match self.entries.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(_) => Err(StateError::DuplicateObservation { id: id.get() }),
            Err(pos) => {
                let mut entries = self.entries.clone();
                entries.insert(pos, (id, symbol));
                Ok(Self { entries })
            }
        }
    }

    /// The restriction of this partial state to `set ∩ domain`.
    pub fn restrict(&self, set: ObservationSet) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(id, _)| set.contains(id))
                .collect(),
        }
    }

    /// True iff `sub` is a substate of `self`: every entry of `sub` is
    /// present in `self` with the same symbol (`self ⪰ sub`).
    pub fn covers(&self, sub: &PartialState) -> bool {
        sub.entries.iter().all(|&(id, x)| self.get(id) == Some(x))
    }

    /// All `2^|domain|` restrictions of this partial state to subsets of its
    /// domain, in deterministic subset-mask order (bit j of the mask selects
    /// the j-th smallest id).
    pub fn substates(&self) -> Vec<PartialState> {
        let n = self.entries.len();
        (0..(1u64 << n))
            .map(|mask| {
                let entries = self
                    .entries
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| mask & (1 << j) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                PartialState { entries }
            })
            .collect()
    }
}

impl fmt::Debug for PartialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PartialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (id, x)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}:{x}")?;
        }
        write!(f, "}}")
    }
}

/// The combinatorial structure of a problem instance: the per-observation
/// symbol alphabets. Alphabets are finite sets of small integers, stored
/// sorted and deduplicated so every enumeration order is canonical
/// (lexicographic by id, then by symbol).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    alphabets: Vec<Vec<i32>>,
    num_states: usize,
}

impl StateSpace {
    pub fn new(alphabets: Vec<Vec<i32>>) -> Result<Self, StateError> {
        if alphabets.len() > MAX_OBSERVATIONS {
            return Err(StateError::TooManyObservations {
                d: alphabets.len(),
            });
        }
        let mut sorted = Vec::with_capacity(alphabets.len());
        let mut num_states: usize = 1;
        for (i, mut alpha) in alphabets.into_iter().enumerate() {
            if alpha.is_empty() {
                return Err(StateError::EmptyAlphabet { id: i + 1 });
            }
            alpha.sort_unstable();
            alpha.dedup();
            num_states = num_states
                .checked_mul(alpha.len())
                .filter(|&n| n <= MAX_STATES)
                .ok_or(StateError::StateSpaceTooLarge)?;
            sorted.push(alpha);
        }
        Ok(Self {
            alphabets: sorted,
            num_states,
        })
    }

    /// Convenience constructor: observation `i` gets the alphabet `0..sizes[i]`.
    pub fn with_sizes(sizes: &[usize]) -> Result<Self, StateError> {
        let alphabets = sizes
            .iter()
            .map(|&k| (0..k as i32).collect())
            .collect();
        Self::new(alphabets)
    }

    /// Number of observations D.
    pub fn d(&self) -> usize {
        self.alphabets.len()
    }

    pub fn observation_ids(&self) -> impl Iterator<Item = ObservationId> + '_ {
        (1..=self.d()).map(ObservationId)
    }

    pub fn full_set(&self) -> ObservationSet {
        ObservationSet::from_ids(self.observation_ids())
    }

    pub fn alphabet(&self, id: ObservationId) -> &[i32] {
        &self.alphabets[id.index0()]
    }

    pub fn alphabets(&self) -> &[Vec<i32>] {
        &self.alphabets
    }

    /// Total number of state vectors, `∏_i |X_i|`.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Position of `symbol` within the alphabet of `id`.
    pub fn symbol_pos(&self, id: ObservationId, symbol: i32) -> Option<usize> {
        self.alphabets[id.index0()].binary_search(&symbol).ok()
    }

    pub fn validate_state(&self, state: &StateVector) -> Result<(), StateError> {
        if state.len() != self.d() {
            return Err(StateError::LengthMismatch {
                got: state.len(),
                expected: self.d(),
            });
        }
        for (i, &x) in state.values().iter().enumerate() {
            if self.alphabets[i].binary_search(&x).is_err() {
                return Err(StateError::SymbolNotInAlphabet { id: i + 1, symbol: x });
            }
        }
        Ok(())
    }

    pub fn validate_partial(&self, psi: &PartialState) -> Result<(), StateError> {
        for &(id, x) in psi.entries() {
            if id.get() > self.d() {
                return Err(StateError::IdOutOfRange {
                    id: id.get(),
                    d: self.d(),
                });
            }
            if self.symbol_pos(id, x).is_none() {
                return Err(StateError::SymbolNotInAlphabet {
                    id: id.get(),
                    symbol: x,
                });
            }
        }
        Ok(())
    }

    /// Row-major index of a state vector (first observation varies slowest).
    pub fn state_index(&self, state: &StateVector) -> usize {
        assert_eq!(state.len(), self.d(), "state vector length mismatch");
        let mut idx = 0;
        for (i, &x) in state.values().iter().enumerate() {
            let pos = self.alphabets[i]
                .binary_search(&x)
                .unwrap_or_else(|_| panic!("symbol {x} not in alphabet of observation {}", i + 1));
            idx = idx * self.alphabets[i].len() + pos;
        }
        idx
    }

    /// State vector at a row-major index.
    pub fn state_at(&self, mut idx: usize) -> StateVector {
        assert!(idx < self.num_states, "state index out of range");
        let mut values = vec![0; self.d()];
        for i in (0..self.d()).rev() {
            let k = self.alphabets[i].len();
            values[i] = self.alphabets[i][idx % k];
            idx /= k;
        }
        StateVector::new(values)
    }

    /// All state vectors in row-major order.
    pub fn enumerate_states(&self) -> Vec<StateVector> {
        (0..self.num_states).map(|i| self.state_at(i)).collect()
    }

    /// Number of partial states with domain exactly `set`, `∏_{i∈set} |X_i|`.
    pub fn partials_count(&self, set: ObservationSet) -> usize {
        set.ids()
            .map(|id| self.alphabets[id.index0()].len())
            .product()
    }

    /// All partial states with domain exactly `set`, in lexicographic order
    /// (ordered by id, the symbol of the largest id varying fastest).
    pub fn enumerate_partials(&self, set: ObservationSet) -> Vec<PartialState> {
        if let Some(max) = set.max_id() {
            assert!(max.get() <= self.d(), "observation id out of range");
        }
        let ids: Vec<ObservationId> = set.ids().collect();
        let total = self.partials_count(set);
        let mut out = Vec::with_capacity(total);
        for k in 0..total {
            let mut rem = k;
            let mut entries = vec![(ObservationId(1), 0); ids.len()];
            for (j, &id) in ids.iter().enumerate().rev() {
                let alpha = &self.alphabets[id.index0()];
                entries[j] = (id, alpha[rem % alpha.len()]);
                rem /= alpha.len();
            }
            out.push(PartialState { entries });
        }
        out
    }

    /// All observation sets of cardinality at most `m`, ordered by
    /// cardinality then lexicographically. Includes the empty set.
    pub fn enumerate_obs_sets(&self, m: usize) -> Result<Vec<ObservationSet>, StateError> {
        if m > self.d() {
            return Err(StateError::BudgetExceedsObservations { m, d: self.d() });
        }
        let mut out = Vec::new();
        for k in 0..=m {
            let mut combo: Vec<usize> = (1..=k).collect();
            loop {
                if k == 0 {
                    out.push(ObservationSet::EMPTY);
                    break;
                }
                out.push(ObservationSet::from_ids(
                    combo.iter().map(|&i| ObservationId(i)),
                ));
                // next k-combination of 1..=d in lexicographic order
                let d = self.d();
                let mut j = k;
                loop {
                    if j == 0 {
                        break;
                    }
                    if combo[j - 1] < d - (k - j) {
                        combo[j - 1] += 1;
                        for l in j..k {
                            combo[l] = combo[l - 1] + 1;
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

    /// `Ψ_tot`: the number of partial states reachable with at most `m`
    /// observations, `Σ_{|I|≤m} ∏_{i∈I} |X_i|`. Computed by dynamic
    /// programming over the truncated product `∏_i (1 + |X_i| x)`.
    pub fn psi_tot(&self, m: usize) -> f64 {
        let mut coeff = vec![0.0_f64; m + 1];
        coeff[0] = 1.0;
        for alpha in &self.alphabets {
            let k = alpha.len() as f64;
            for j in (1..=m).rev() {
                coeff[j] += coeff[j - 1] * k;
            }
        }
        coeff.iter().sum()
    }

    /// `Ψ_max`: the largest number of one-step extensions of any partial
    /// state by any observation, i.e. the largest alphabet size.
    pub fn psi_max(&self) -> usize {
        self.alphabets.iter().map(|a| a.len()).max().unwrap_or(1)
    }

    /// Number of observation sets of cardinality at most `m`.
    pub fn obs_set_count(&self, m: usize) -> f64 {
        let mut coeff = vec![0.0_f64; m + 1];
        coeff[0] = 1.0;
        for _ in 0..self.d() {
            for j in (1..=m).rev() {
                coeff[j] += coeff[j - 1];
            }
        }
        coeff.iter().sum()
    }
}
