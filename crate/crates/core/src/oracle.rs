//! Brute-force reference computations.
//!
//! Everything here is deliberately naive and shares no code path with the
//! routines it cross-checks: pure-profile enumeration for expected losses,
//! `n^n` enumeration of swap functions, and power iteration for stationary
//! distributions.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::games::Game;
use crate::markov::StochasticMatrix;
use crate::strategy::MixedStrategy;

/// Expected native-unit losses of `player` by summing over all pure profiles.
pub fn brute_force_loss_vector(game: &Game, player: usize, profile: &[MixedStrategy]) -> Vec<f64> {
    let n = game.num_actions();
    let m = game.num_players();
    let mut out = vec![0.0; n];
    let total = n.pow(m as u32);
    for idx in 0..total {
        let s = game.profile_at(idx);
        let weight: f64 = (0..m).filter(|&k| k != player).map(|k| profile[k][s[k]]).product();
        out[s[player]] += weight * game.losses(player)[idx];
    }
    out
}

/// Swap regret by trying every one of the `n^n` swap functions.
///
/// Returns the regret and the lexicographically first minimizing function.
pub fn brute_force_swap_regret(strategies: &[&[f64]], losses: &[&[f64]], n: usize) -> (f64, Vec<usize>) {
    let played: f64 = strategies
        .iter()
        .zip(losses)
        .map(|(x, l)| x.iter().zip(l.iter()).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    let mut phi = vec![0usize; n];
    let mut best = (f64::INFINITY, phi.clone());
    loop {
        let swapped: f64 = strategies
            .iter()
            .zip(losses)
            .map(|(x, l)| (0..n).map(|j| x[j] * l[phi[j]]).sum::<f64>())
            .sum();
        if swapped < best.0 {
            best = (swapped, phi.clone());
        }
        // Odometer increment, last coordinate fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return (played - best.0, best.1);
            }
            k -= 1;
            phi[k] += 1;
            if phi[k] < n {
                break;
            }
            phi[k] = 0;
        }
    }
}

/// Iterates `p ← pQ` from the uniform distribution.
pub fn power_iteration(q: &StochasticMatrix, iterations: usize) -> Vec<f64> {
    let n = q.n();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        p = q.left_multiply(&p);
    }
    let s: f64 = p.iter().sum();
    p.iter().map(|v| v / s).collect()
}

/// A chain with i.i.d. entries drawn from `[0.001, 1.001)`, rows normalized.
pub fn random_positive_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StochasticMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| 0.001 + rng.random::<f64>()).collect();
            let s: f64 = r.iter().sum();
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    StochasticMatrix::from_rows(&rows).expect("normalized positive rows")
}
