//! Linear maximization over an L1 ball around an empirical distribution,
//! intersected with the probability simplex.
//!
//! This is the inner optimization shared by both optimistic planners: given an
//! empirical distribution `p̂`, per-outcome values and an L1 budget, find the
//! distribution inside the budget that maximizes the expected value. For a
//! linear objective the greedy exchange is exactly optimal: raise the single
//! best outcome by `min(radius/2, 1 - p̂[best])` and drain the same mass from
//! the worst outcomes in ascending value order.

use thiserror::Error;

/// Validation slack for simplex membership of the input distribution.
const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum L1Error {
    #[error("problem must have at least one outcome")]
    Empty,
    #[error("p_hat has {p} entries but values has {v}")]
    LengthMismatch { p: usize, v: usize },
    #[error("p_hat is not a probability distribution (entry {index} = {value})")]
    NotADistribution { index: usize, value: f64 },
    #[error("p_hat sums to {sum}, not 1")]
    DoesNotSumToOne { sum: f64 },
    #[error("radius {0} outside [0, 2]")]
    BadRadius(f64),
    #[error("values must be finite (entry {index} = {value})")]
    NonFiniteValue { index: usize, value: f64 },
}

/// A validated instance of the inner maximization.
#[derive(Debug, Clone)]
pub struct L1BallProblem {
    p_hat: Vec<f64>,
    values: Vec<f64>,
    radius: f64,
}

impl L1BallProblem {
    pub fn new(p_hat: Vec<f64>, values: Vec<f64>, radius: f64) -> Result<Self, L1Error> {
        if p_hat.is_empty() {
            return Err(L1Error::Empty);
        }
        if p_hat.len() != values.len() {
            return Err(L1Error::LengthMismatch {
                p: p_hat.len(),
                v: values.len(),
            });
        }
        for (i, &p) in p_hat.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0 + SIMPLEX_TOL).contains(&p) {
                return Err(L1Error::NotADistribution { index: i, value: p });
            }
        }
        let sum: f64 = p_hat.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(L1Error::DoesNotSumToOne { sum });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(L1Error::NonFiniteValue { index: i, value: v });
            }
        }
        if !radius.is_finite() || !(0.0..=2.0 + SIMPLEX_TOL).contains(&radius) {
            return Err(L1Error::BadRadius(radius));
        }
        Ok(Self {
            p_hat,
            values,
            radius,
        })
    }

    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Exact maximizer of `p · values` over the simplex restricted to
/// `‖p − p̂‖₁ ≤ radius`. Returns the maximizing distribution and its value.
///
/// Argmax ties among outcome values are broken toward the lowest index, so
/// the result is a deterministic function of the inputs.
pub fn l1_linear_max(problem: &L1BallProblem) -> (Vec<f64>, f64) {
    let p_hat = &problem.p_hat;
    let values = &problem.values;
    let k = p_hat.len();

    // Receiver: lowest-index argmax of the outcome values.
    let mut best = 0;
    for j in 1..k {
        if values[j] > values[best] {
            best = j;
        }
    }

    let budget = (problem.radius * 0.5).min((1.0 - p_hat[best]).max(0.0));
    let mut p = p_hat.clone();
    p[best] += budget;

    if budget > 0.0 {
        // Donors in ascending value order (ties toward the lowest index).
        let mut order: Vec<usize> = (0..k).filter(|&j| j != best).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .expect("values are finite")
                .then(a.cmp(&b))
        });
        let mut remaining = budget;
        for j in order {
            if remaining <= 0.0 {
                break;
            }
            let take = p[j].min(remaining);
            p[j] -= take;
            remaining -= take;
        }
    }

    let mut value = 0.0;
    for j in 0..k {
        value += p[j] * values[j];
    }
    (p, value)
}
