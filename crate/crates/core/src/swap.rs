//! Swap-regret learners built on optimistic Hedge.
//!
//! [`BmState`] is the Blum–Mansour reduction: one optimistic-Hedge copy per
//! action, each fed the round's loss scaled by the probability the played
//! strategy put on its action, and the played strategy is the stationary
//! distribution of the matrix whose rows are the copies' strategies.
//!
//! [`MetaExpertState`] runs a single optimistic Hedge over swap functions
//! and plays the stationary distribution of the weight-averaged swap matrix.

use alloc::vec;
use alloc::vec::Vec;

use log::warn;

use crate::error::{Error, Result};
use crate::learners::{HedgeState, HedgeVariant};
use crate::markov::{stationary, StochasticMatrix};
use crate::strategy::{LossVector, MixedStrategy};

/// Largest learning rate for which the per-round movement bound is stated.
pub const BM_STABLE_ETA: f64 = 1.0 / 6.0;

/// Largest action count for the full `n^n` meta-expert.
pub const MAX_FULL_META_ACTIONS: usize = 4;

#[derive(Debug, Clone)]
pub struct BmState {
    eta: f64,
    inner: Vec<HedgeState>,
    q: StochasticMatrix,
    x: MixedStrategy,
    prev_x: MixedStrategy,
    prev_loss: LossVector,
    exceeds_stable_eta: bool,
}

impl BmState {
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        let inner = (0..n)
            .map(|_| HedgeState::new(n, eta, HedgeVariant::Optimistic, None))
            .collect::<Result<Vec<_>>>()?;
        let exceeds_stable_eta = eta > BM_STABLE_ETA;
        if exceeds_stable_eta {
            warn!("BM learning rate {eta} exceeds 1/6; the per-round movement bound does not apply");
        }
        Ok(BmState {
            eta,
            inner,
            q: StochasticMatrix::uniform(n),
            x: MixedStrategy::uniform(n),
            prev_x: MixedStrategy::uniform(n),
            prev_loss: LossVector::zeros(n),
            exceeds_stable_eta,
        })
    }

    /// Strategy to play this round.
    pub fn strategy(&self) -> &MixedStrategy {
        &self.x
    }

    pub fn prev_strategy(&self) -> &MixedStrategy {
        &self.prev_x
    }

    pub fn prev_loss(&self) -> &LossVector {
        &self.prev_loss
    }

    pub fn chain(&self) -> &StochasticMatrix {
        &self.q
    }

    pub fn inner(&self) -> &[HedgeState] {
        &self.inner
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// True when `eta > 1/6`.
    pub fn exceeds_stable_eta(&self) -> bool {
        self.exceeds_stable_eta
    }

    /// Feeds `x(i)·ℓ` to copy `i`, rebuilds the chain and returns the next
    /// round's strategy.
    pub fn step(&mut self, loss: &LossVector) -> Result<MixedStrategy> {
        let n = self.inner.len();
        if loss.len() != n {
            return Err(Error::Dimension {
                what: "loss vector",
                expected: n,
                found: loss.len(),
            });
        }
        for (i, copy) in self.inner.iter_mut().enumerate() {
            copy.step(&loss.scaled(self.x[i]))?;
        }
        let rows: Vec<MixedStrategy> = self.inner.iter().map(|h| h.strategy().clone()).collect();
        self.q = StochasticMatrix::from_strategies(&rows)?;
        let next = stationary(&self.q)?;
        self.prev_x = core::mem::replace(&mut self.x, next);
        self.prev_loss = loss.clone();
        Ok(self.x.clone())
    }
}

/// A swap function `φ: [n] → [n]`, i.e. a 0/1 matrix with one 1 per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapMatrix {
    mapping: Vec<usize>,
}

impl SwapMatrix {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        if mapping.iter().any(|&j| j >= n) {
            return Err(Error::Parameter("swap target out of range".into()));
        }
        Ok(SwapMatrix { mapping })
    }

    pub fn identity(n: usize) -> Self {
        SwapMatrix {
            mapping: (0..n).collect(),
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.mapping[i] == j {
            1.0
        } else {
            0.0
        }
    }

    /// `x S^φ ℓ = Σ_i x(i) ℓ(φ(i))`.
    pub fn apply(&self, x: &[f64], loss: &[f64]) -> f64 {
        self.mapping.iter().zip(x).map(|(&j, xi)| xi * loss[j]).sum()
    }

    /// All `n^n` swap functions in lexicographic order.
    pub fn all(n: usize) -> Vec<SwapMatrix> {
        let total = n.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut mapping = vec![0; n];
                for slot in mapping.iter_mut().rev() {
                    *slot = idx % n;
                    idx /= n;
                }
                SwapMatrix { mapping }
            })
            .collect()
    }

    /// The identity followed by the `n(n−1)` functions that move exactly one
    /// action `a` to some `b ≠ a`.
    pub fn single_coordinate(n: usize) -> Vec<SwapMatrix> {
        let mut out = vec![SwapMatrix::identity(n)];
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                let mut mapping: Vec<usize> = (0..n).collect();
                mapping[a] = b;
                out.push(SwapMatrix { mapping });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaMode {
    /// All `n^n` swap functions; `n ≤ 4`.
    Full,
    /// Identity plus single-coordinate swaps, `n² − n + 1` experts.
    SingleCoordinate,
}

#[derive(Debug, Clone)]
pub struct MetaExpertState {
    mode: MetaMode,
    experts: Vec<SwapMatrix>,
    weights: HedgeState,
    q: StochasticMatrix,
    x: MixedStrategy,
    prev_x: MixedStrategy,
    prev_loss: LossVector,
}

impl MetaExpertState {
    pub fn new(n: usize, eta: f64, mode: MetaMode) -> Result<Self> {
        let experts = match mode {
            MetaMode::Full if n > MAX_FULL_META_ACTIONS => {
                return Err(Error::Capacity {
                    what: "full swap-matrix expert set",
                    size: n,
                    limit: MAX_FULL_META_ACTIONS,
                })
            }
            MetaMode::Full => SwapMatrix::all(n),
            MetaMode::SingleCoordinate => SwapMatrix::single_coordinate(n),
        };
        let weights = HedgeState::new(experts.len(), eta, HedgeVariant::Optimistic, None)?;
        let q = Self::assemble(&experts, weights.strategy(), n)?;
        let x = stationary(&q)?;
        Ok(MetaExpertState {
            mode,
            experts,
            weights,
            q,
            prev_x: x.clone(),
            x,
            prev_loss: LossVector::zeros(n),
        })
    }

    fn assemble(experts: &[SwapMatrix], weights: &MixedStrategy, n: usize) -> Result<StochasticMatrix> {
        let mut entries = vec![0.0; n * n];
        for (phi, &w) in experts.iter().zip(weights.probs()) {
            for (i, &j) in phi.mapping().iter().enumerate() {
                entries[i * n + j] += w;
            }
        }
        // Renormalize rows against summation round-off.
        for row in entries.chunks_mut(n) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        StochasticMatrix::new(n, entries)
    }

    pub fn mode(&self) -> MetaMode {
        self.mode
    }

    pub fn experts(&self) -> &[SwapMatrix] {
        &self.experts
    }

    /// Current distribution over experts.
    pub fn weights(&self) -> &MixedStrategy {
        self.weights.strategy()
    }

    pub fn chain(&self) -> &StochasticMatrix {
        &self.q
    }

    pub fn strategy(&self) -> &MixedStrategy {
        &self.x
    }

    pub fn prev_strategy(&self) -> &MixedStrategy {
        &self.prev_x
    }

    pub fn prev_loss(&self) -> &LossVector {
        &self.prev_loss
    }

    pub fn eta(&self) -> f64 {
        self.weights.eta()
    }

    pub fn step(&mut self, loss: &LossVector) -> Result<MixedStrategy> {
        let n = self.x.len();
        if loss.len() != n {
            return Err(Error::Dimension {
                what: "loss vector",
                expected: n,
                found: loss.len(),
            });
        }
        let expert_losses: Vec<f64> = self
            .experts
            .iter()
            .map(|phi| phi.apply(self.x.probs(), loss.values()))
            .collect();
        self.weights.step(&LossVector::new(expert_losses)?)?;
        self.q = Self::assemble(&self.experts, self.weights.strategy(), n)?;
        let next = stationary(&self.q)?;
        self.prev_x = core::mem::replace(&mut self.x, next);
        self.prev_loss = loss.clone();
        Ok(self.x.clone())
    }
}

/// Largest `‖x^t − x^{t−1}‖₁` along a strategy sequence.
pub fn strategy_drift(trace: &[MixedStrategy]) -> f64 {
    trace
        .windows(2)
        .map(|w| w[1].l1_distance(&w[0]))
        .fold(0.0, f64::max)
}
