//! Probability vectors over actions and loss vectors in `[0, 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance on `Σp = 1` for a valid mixed strategy.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Tolerance on loss entries lying in `[0, 1]`.
pub const LOSS_TOL: f64 = 1e-9;

/// A probability distribution over `n` actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Parameter("empty strategy".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::Parameter(format!("strategy entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Parameter(format!("strategy sums to {sum}, not 1")));
        }
        Ok(MixedStrategy(probs))
    }

    pub fn uniform(n: usize) -> Self {
        MixedStrategy(vec![1.0 / n as f64; n])
    }

    /// The point mass on `action`.
    pub fn pure(n: usize, action: usize) -> Self {
        let mut p = vec![0.0; n];
        p[action] = 1.0;
        MixedStrategy(p)
    }

    /// Softmax of unnormalized log-weights, computed with max-subtraction.
    ///
    /// Entries equal to `-inf` map to probability zero; at least one entry
    /// must be finite.
    pub fn from_log_weights(log_weights: &[f64]) -> Self {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = log_weights.iter().map(|w| libm::exp(w - max)).collect();
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= sum);
        MixedStrategy(p)
    }

    /// Wraps a vector the caller has already normalized.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        MixedStrategy(probs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        dot(&self.0, values)
    }

    pub fn l1_distance(&self, other: &MixedStrategy) -> f64 {
        l1_distance(&self.0, &other.0)
    }
}

impl core::ops::Index<usize> for MixedStrategy {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Expected losses of each action, all in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    /// Validates that every entry lies in `[0, 1]` up to [`LOSS_TOL`].
    ///
    /// Entries within tolerance of the boundary are clamped into range.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if !(*v >= -LOSS_TOL && *v <= 1.0 + LOSS_TOL) {
                return Err(Error::Contract(format!("loss entry {v} outside [0, 1]")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(LossVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        LossVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `c · ℓ` for `c ∈ [0, 1]`; stays in range.
    pub fn scaled(&self, c: f64) -> LossVector {
        debug_assert!((0.0..=1.0 + 1e-12).contains(&c));
        LossVector(self.0.iter().map(|v| (v * c).min(1.0)).collect())
    }

    pub fn linf_distance(&self, other: &LossVector) -> f64 {
        linf_distance(&self.0, &other.0)
    }
}

impl core::ops::Index<usize> for LossVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
