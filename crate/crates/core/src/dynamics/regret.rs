//! External and swap regret of a recorded trace, in `[0, 1]` loss units.
//!
//! Swap regret decomposes over actions: with
//! `C(j, k) = Σ_τ x^τ(j)·ℓ^τ(k)`, the best swap function maps each `j`
//! independently to `argmin_k C(j, k)` (ties to the smallest index).

use alloc::vec;
use alloc::vec::Vec;

use super::Trace;

/// `Σ_{τ≤t} ⟨x^τ, ℓ^τ⟩ − min_j Σ_{τ≤t} ℓ^τ(j)`.
pub fn external_regret(trace: &Trace, player: usize, upto: usize) -> f64 {
    external_with_witness(trace, player, upto).0
}

fn external_with_witness(trace: &Trace, player: usize, upto: usize) -> (f64, usize) {
    assert!(upto <= trace.len());
    let n = trace.num_actions;
    let mut played = 0.0;
    let mut cumulative = vec![0.0; n];
    for r in &trace.rounds[..upto] {
        played += r.realized[player];
        cumulative.iter_mut().zip(r.losses[player].values()).for_each(|(c, l)| *c += l);
    }
    let (best, value) = argmin(&cumulative);
    (played - value, best)
}

/// External regret after every round: element `t − 1` is the regret at `t`.
pub fn external_regret_curve(trace: &Trace, player: usize) -> Vec<f64> {
    let n = trace.num_actions;
    let mut played = 0.0;
    let mut cumulative = vec![0.0; n];
    trace
        .rounds
        .iter()
        .map(|r| {
            played += r.realized[player];
            cumulative.iter_mut().zip(r.losses[player].values()).for_each(|(c, l)| *c += l);
            played - argmin(&cumulative).1
        })
        .collect()
}

/// `max_i Regret_i(t)` after every round.
pub fn max_player_regret_curve(trace: &Trace) -> Vec<f64> {
    let curves: Vec<Vec<f64>> = (0..trace.num_players).map(|i| external_regret_curve(trace, i)).collect();
    (0..trace.len())
        .map(|t| curves.iter().map(|c| c[t]).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Swap regret up to round `upto` and the minimizing swap function.
pub fn swap_regret(trace: &Trace, player: usize, upto: usize) -> (f64, Vec<usize>) {
    assert!(upto <= trace.len());
    let n = trace.num_actions;
    let mut c = vec![0.0; n * n];
    for r in &trace.rounds[..upto] {
        accumulate(&mut c, r.strategies[player].probs(), r.losses[player].values());
    }
    best_swap(&c, n)
}

/// Swap regret at each requested round (ascending, each `≤ T`).
pub fn swap_regret_curve(trace: &Trace, player: usize, checkpoints: &[usize]) -> Vec<f64> {
    let n = trace.num_actions;
    let mut c = vec![0.0; n * n];
    let mut done = 0;
    checkpoints
        .iter()
        .map(|&t| {
            assert!(t >= done && t <= trace.len(), "checkpoints must ascend within the trace");
            for r in &trace.rounds[done..t] {
                accumulate(&mut c, r.strategies[player].probs(), r.losses[player].values());
            }
            done = t;
            best_swap(&c, n).0
        })
        .collect()
}

fn accumulate(c: &mut [f64], x: &[f64], loss: &[f64]) {
    let n = x.len();
    for (j, &xj) in x.iter().enumerate() {
        for (k, &lk) in loss.iter().enumerate() {
            c[j * n + k] += xj * lk;
        }
    }
}

fn best_swap(c: &[f64], n: usize) -> (f64, Vec<usize>) {
    let mut regret = 0.0;
    let phi = (0..n)
        .map(|j| {
            let row = &c[j * n..(j + 1) * n];
            let (k, v) = argmin(row);
            regret += row[j] - v;
            k
        })
        .collect();
    (regret, phi)
}

fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: usize,
    pub external: Vec<f64>,
    pub swap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub external: Vec<f64>,
    pub swap: Vec<f64>,
    pub best_action: Vec<usize>,
    pub best_swap: Vec<Vec<usize>>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Powers of two up to `len`, followed by every round in the final
/// `[T − ⌊√T⌋, T]` window.
pub fn default_checkpoints(len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 1;
    while p <= len {
        out.push(p);
        p *= 2;
    }
    let start = len - libm::sqrt(len as f64) as usize;
    out.extend((start.max(1)..=len).filter(|t| !t.is_power_of_two()));
    out.sort_unstable();
    out.dedup();
    out
}

/// Final regrets with witnesses and curves at `checkpoints`.
pub fn regret_report(trace: &Trace, checkpoints: &[usize]) -> RegretReport {
    let m = trace.num_players;
    let t = trace.len();
    let ext: Vec<(f64, usize)> = (0..m).map(|i| external_with_witness(trace, i, t)).collect();
    let swaps: Vec<(f64, Vec<usize>)> = (0..m).map(|i| swap_regret(trace, i, t)).collect();
    let ext_curves: Vec<Vec<f64>> = (0..m).map(|i| external_regret_curve(trace, i)).collect();
    let swap_curves: Vec<Vec<f64>> = (0..m).map(|i| swap_regret_curve(trace, i, checkpoints)).collect();
    let checkpoints = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &t)| Checkpoint {
            t,
            external: ext_curves.iter().map(|c| if t == 0 { 0.0 } else { c[t - 1] }).collect(),
            swap: swap_curves.iter().map(|c| c[k]).collect(),
        })
        .collect();
    RegretReport {
        external: ext.iter().map(|e| e.0).collect(),
        best_action: ext.iter().map(|e| e.1).collect(),
        swap: swaps.iter().map(|s| s.0).collect(),
        best_swap: swaps.into_iter().map(|s| s.1).collect(),
        checkpoints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_against, EtaRule, LearnerConfig};
    use crate::oracle::brute_force_swap_regret;
    use crate::strategy::{LossVector, MixedStrategy};
    use crate::dynamics::Round;
    use crate::games::Scale;
    use proptest::prelude::*;

    fn trace_of(xs: Vec<Vec<f64>>, ls: Vec<Vec<f64>>) -> Trace {
        let n = xs[0].len();
        let rounds = xs
            .into_iter()
            .zip(ls)
            .map(|(x, l)| {
                let x = MixedStrategy::new(x).unwrap();
                let l = LossVector::new(l).unwrap();
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

    #[test]
    fn single_round_external() {
        let t = trace_of(vec![vec![0.4, 0.6]], vec![vec![0.0, 1.0]]);
        assert!((external_regret(&t, 0, 1) - 0.6).abs() < 1e-15);
        assert_eq!(external_regret(&t, 0, 0), 0.0);
    }

    #[test]
    fn pure_best_action_has_no_regret() {
        let t = trace_of(vec![vec![1.0, 0.0]; 10], vec![vec![0.2, 0.7]; 10]);
        assert_eq!(external_regret(&t, 0, 10), 0.0);
        let (s, phi) = swap_regret(&t, 0, 10);
        assert_eq!(s, 0.0);
        assert_eq!(phi, vec![0, 0]);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let t = trace_of(vec![vec![0.5, 0.5]], vec![vec![0.3, 0.3]]);
        assert_eq!(swap_regret(&t, 0, 1).1, vec![0, 0]);
    }

    #[test]
    fn checkpoints_cover_powers_and_window() {
        let c = default_checkpoints(100);
        assert_eq!(&c[..7], &[1, 2, 4, 8, 16, 32, 64]);
        assert_eq!(&c[7..], &(90..=100).collect::<Vec<_>>()[..]);
        assert!(default_checkpoints(0).is_empty());
    }

    #[test]
    fn report_is_consistent_with_direct_calls() {
        let losses: Vec<LossVector> = (0..40)
            .map(|k| LossVector::new(vec![(k % 3) as f64 / 2.0, 0.4, (k % 5) as f64 / 4.0]).unwrap())
            .collect();
        let t = run_against(&LearnerConfig::optimistic(EtaRule::Fixed(0.3)), 3, &losses, 0).unwrap();
        let cps = default_checkpoints(40);
        let rep = regret_report(&t, &cps);
        assert_eq!(rep.external[0], external_regret(&t, 0, 40));
        for cp in &rep.checkpoints {
            assert!((cp.external[0] - external_regret(&t, 0, cp.t)).abs() < 1e-12);
            assert_eq!(cp.swap[0], swap_regret(&t, 0, cp.t).0);
        }
    }

    fn arb_trace(n: usize) -> impl Strategy<Value = Trace> {
        (1usize..=50).prop_flat_map(move |len| {
            (
                proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, n), len),
                proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, n), len),
            )
                .prop_map(|(ws, ls)| {
                    let xs = ws
                        .into_iter()
                        .map(|w| {
                            let s: f64 = w.iter().sum();
                            w.iter().map(|v| v / s).collect()
                        })
                        .collect();
                    trace_of(xs, ls)
                })
        })
    }

    proptest! {
        #[test]
        fn swap_dominates_external(t in (2usize..=5).prop_flat_map(arb_trace)) {
            let len = t.len();
            let (s, _) = swap_regret(&t, 0, len);
            prop_assert!(s >= external_regret(&t, 0, len) - 1e-12);
            prop_assert!(external_regret(&t, 0, len) >= -(len as f64));
        }

        #[test]
        fn argmin_decomposition_matches_enumeration(t in (2usize..=4).prop_flat_map(arb_trace)) {
            let xs: Vec<&[f64]> = t.rounds.iter().map(|r| r.strategies[0].probs()).collect();
            let ls: Vec<&[f64]> = t.rounds.iter().map(|r| r.losses[0].values()).collect();
            let (brute, brute_phi) = brute_force_swap_regret(&xs, &ls, t.num_actions);
            let (fast, phi) = swap_regret(&t, 0, t.len());
            prop_assert!((brute - fast).abs() <= 1e-12 * (1.0 + t.len() as f64));
            // Any disagreement in the witness must be an exact tie.
            let swapped = |p: &[usize]| -> f64 {
                xs.iter().zip(&ls).map(|(x, l)| (0..x.len()).map(|j| x[j] * l[p[j]]).sum::<f64>()).sum()
            };
            prop_assert!((swapped(&phi) - swapped(&brute_phi)).abs() <= 1e-12 * (1.0 + t.len() as f64));
        }
    }
}
