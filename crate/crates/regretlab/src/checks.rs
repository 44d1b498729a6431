//! Seeded cross-checks of the fast routines against brute-force references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regretlab_core::dynamics::{swap_regret, Round};
use regretlab_core::oracle::{brute_force_swap_regret, random_positive_chain};
use regretlab_core::{
    certify_multiplicative, perturbation_gap, stationary, tree_stationary, EtaRule, LearnerConfig, LossVector,
    MixedStrategy, Scale, StochasticMatrix, Trace,
};
use serde::Serialize;

use crate::error::Result;

/// Outcome of a batch of randomized comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest discrepancy (or smallest slack, for inequalities) observed.
    pub worst: f64,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// LU stationary distribution vs the spanning-tree formula, ℓ₁ within `tol`.
pub fn markov_oracle(n: usize, trials: usize, seed: u64, tol: f64) -> Result<CheckSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..trials {
        let q = random_positive_chain(n, &mut rng);
        let d = stationary(&q)?.l1_distance(&tree_stationary(&q)?);
        worst = worst.max(d);
        failures += usize::from(!(d <= tol));
    }
    Ok(CheckSummary {
        name: format!("stationary vs tree formula, n={n}"),
        trials,
        failures,
        worst,
    })
}

/// A chain whose rows are `q`'s rows with each entry scaled by a factor in
/// `[1 − δ_i, 1 + δ_i]`, then renormalized.
pub fn scaled_rows<R: Rng + ?Sized>(q: &StochasticMatrix, deltas: &[f64], rng: &mut R) -> Result<StochasticMatrix> {
    let n = q.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r: Vec<f64> = q
                .row(i)
                .iter()
                .map(|&v| v * (1.0 + deltas[i] * (2.0 * rng.random::<f64>() - 1.0)))
                .collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Ok(StochasticMatrix::from_rows(&rows)?)
}

/// `‖p − p'‖₁ ≤ 8 Σ η_i` on multiplicatively perturbed chains with
/// `Σ η_i ≤ 1/4`. `worst` is the smallest slack `8Ση − gap`.
pub fn perturbation_bound(n: usize, trials: usize, seed: u64) -> Result<CheckSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    let mut done = 0;
    while done < trials {
        let q = random_positive_chain(n, &mut rng);
        // Row scalings by 1 ± δ followed by renormalization move each ratio by
        // at most 2δ/(1 − δ) < 3δ; keeping Σ 3δ_i ≤ 1/4 leaves room.
        let budget = 0.25 * rng.random::<f64>();
        let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v *= budget / (3.0 * s));
        let q2 = scaled_rows(&q, &w, &mut rng)?;
        let cert = certify_multiplicative(&q2, &q)?;
        if cert.sum() > 0.25 {
            continue;
        }
        let (gap, bound) = perturbation_gap(&q2, &q)?;
        worst = worst.min(bound - gap);
        failures += usize::from(gap > bound);
        done += 1;
    }
    Ok(CheckSummary {
        name: format!("perturbation bound, n={n}"),
        trials,
        failures,
        worst,
    })
}

/// A single-player trace with random strategies and losses.
pub fn random_trace<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> Trace {
    let rounds = (0..len)
        .map(|_| {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            let x = MixedStrategy::new(w.iter().map(|v| v / s).collect()).expect("normalized");
            let l = LossVector::new((0..n).map(|_| rng.random::<f64>()).collect()).expect("in range");
            Round {
                realized: vec![x.dot(l.values())],
                strategies: vec![x],
                losses: vec![l],
            }
        })
        .collect();
    Trace {
        num_players: 1,
        num_actions: n,
        scale: Scale::Unit,
        configs: vec![LearnerConfig::vanilla(EtaRule::Fixed(1.0))],
        etas: vec![1.0],
        seed: 0,
        rounds,
        final_strategies: vec![MixedStrategy::uniform(n)],
    }
}

/// Per-action argmin swap regret vs enumeration of all `n^n` swap functions.
///
/// A trial fails when the witnesses differ or the values differ by more
/// than a few ulps of the accumulated loss. `worst` is the largest value
/// difference.
pub fn swap_oracle(n: usize, trials: usize, max_len: usize, seed: u64) -> CheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..trials {
        let len = rng.random_range(1..=max_len);
        let trace = random_trace(n, len, &mut rng);
        let xs: Vec<&[f64]> = trace.rounds.iter().map(|r| r.strategies[0].probs()).collect();
        let ls: Vec<&[f64]> = trace.rounds.iter().map(|r| r.losses[0].values()).collect();
        let (brute, brute_phi) = brute_force_swap_regret(&xs, &ls, n);
        let (fast, phi) = swap_regret(&trace, 0, len);
        let d = (brute - fast).abs();
        worst = worst.max(d);
        failures += usize::from(phi != brute_phi || d > 1e-12 * len as f64);
    }
    CheckSummary {
        name: format!("swap regret vs enumeration, n={n}"),
        trials,
        failures,
        worst,
    }
}
