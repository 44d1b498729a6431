//! Lower-bound probe for vanilla Hedge on the three 2×2 games.
//!
//! The learning rate picks the game: very small rates are probed on the
//! game where the column player cannot move, moderate rates on Matching
//! Pennies, and large rates on the cooperation game. Regrets are reported in
//! raw `[-1, 1]` units.

use regretlab_core::dynamics::{external_regret, max_player_regret_curve};
use regretlab_core::{canonical_game, run, run_with_horizon, CanonicalGame, EtaRule, LearnerConfig, MixedStrategy};
use serde::Serialize;

use crate::error::{AppError, Result};

pub const MIN_PROBE_ROUNDS: usize = 100;

/// Rates at or above this go to the cooperation game.
pub const LARGE_ETA: f64 = 3.0;

/// Rates below `SMALL_ETA_SCALE / √T` go to the invariant game.
pub const SMALL_ETA_SCALE: f64 = 8.0;

pub fn route(rounds: usize, eta: f64) -> CanonicalGame {
    if eta >= LARGE_ETA {
        CanonicalGame::Cooperation
    } else if eta < SMALL_ETA_SCALE / (rounds as f64).sqrt() {
        CanonicalGame::Invariant
    } else {
        CanonicalGame::MatchingPennies
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corridor {
    pub lower: f64,
    pub upper: f64,
    pub min_a: f64,
    pub max_a: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub game: &'static str,
    pub rounds: usize,
    pub eta: f64,
    /// Row player's external regret after `rounds` rounds.
    pub player1_regret: f64,
    /// `max_{T' ∈ [T, T + ⌊√T⌋]} max_i Regret_i(T')`; Matching Pennies only.
    pub window_max_regret: Option<f64>,
    /// Regret from the closed-form trajectory; invariant game only.
    pub closed_form_regret: Option<f64>,
    /// The alternating sequence `a_t`; cooperation game only.
    pub corridor: Option<Corridor>,
    /// Smallest per-round raw loss of the row player; cooperation game only.
    pub min_round_loss: Option<f64>,
}

fn start() -> LearnerConfig {
    LearnerConfig::vanilla(EtaRule::Fixed(1.0)).with_initial(MixedStrategy::new(vec![0.4, 0.6]).expect("valid"))
}

/// Routes `eta` with [`route`] and probes the chosen game.
pub fn lower_bound_probe(rounds: usize, eta: f64) -> Result<ProbeReport> {
    probe_game(route(rounds, eta), rounds, eta)
}

/// Both players run vanilla Hedge with raw step `eta` from `(0.4, 0.6)`.
pub fn probe_game(which: CanonicalGame, rounds: usize, eta: f64) -> Result<ProbeReport> {
    if rounds < MIN_PROBE_ROUNDS {
        return Err(AppError::Validation(format!("probe needs at least {MIN_PROBE_ROUNDS} rounds")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(AppError::Validation(format!("learning rate must be positive, got {eta}")));
    }
    let game = canonical_game(which);
    let config = LearnerConfig { eta: EtaRule::Fixed(eta), ..start() };
    let configs = vec![config; 2];
    let mut report = ProbeReport {
        game: which.name(),
        rounds,
        eta,
        player1_regret: 0.0,
        window_max_regret: None,
        closed_form_regret: None,
        corridor: None,
        min_round_loss: None,
    };
    match which {
        CanonicalGame::MatchingPennies => {
            let extra = (rounds as f64).sqrt() as usize;
            let trace = run_with_horizon(&game, &configs, rounds + extra, rounds, 0)?;
            report.player1_regret = trace.to_native_regret(external_regret(&trace, 0, rounds));
            let curve = max_player_regret_curve(&trace);
            let w = curve[rounds - 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            report.window_max_regret = Some(trace.to_native_regret(w));
        }
        CanonicalGame::Invariant => {
            let trace = run(&game, &configs, rounds, 0)?;
            report.player1_regret = trace.to_native_regret(external_regret(&trace, 0, rounds));
            report.closed_form_regret = Some(invariant_closed_form(rounds, eta));
        }
        CanonicalGame::Cooperation => {
            let trace = run(&game, &configs, rounds, 0)?;
            report.player1_regret = trace.to_native_regret(external_regret(&trace, 0, rounds));
            let lower = eta * (-2.0 * eta).exp();
            let upper = 0.4;
            let (mut min_a, mut max_a) = (f64::INFINITY, f64::NEG_INFINITY);
            let mut min_loss = f64::INFINITY;
            for (t, r) in trace.rounds.iter().enumerate() {
                let x = r.strategies[0][0];
                let a = if t % 2 == 0 { x } else { 1.0 - x };
                min_a = min_a.min(a);
                max_a = max_a.max(a);
                min_loss = min_loss.min(trace.scale.to_native(r.realized[0]));
            }
            report.corridor = Some(Corridor {
                lower,
                upper,
                min_a,
                max_a,
                holds: lower <= min_a && max_a <= upper,
            });
            report.min_round_loss = Some(min_loss);
        }
    }
    Ok(report)
}

/// On the invariant game the row player faces raw loss `(−0.2, 0.2)` every
/// round, so `x_t(1) = σ(ln(2/3) + 0.4η(t − 1))` and the regret is
/// `Σ_t 0.4·(1 − x_t(1))`.
pub fn invariant_closed_form(rounds: usize, eta: f64) -> f64 {
    let z0 = (0.4f64 / 0.6).ln();
    (0..rounds)
        .map(|k| {
            let z = z0 + 0.4 * eta * k as f64;
            // 1 − σ(z) = σ(−z)
            0.4 / (1.0 + z.exp())
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing() {
        assert_eq!(route(10_000, 0.01), CanonicalGame::Invariant);
        assert_eq!(route(10_000, 1.0), CanonicalGame::MatchingPennies);
        assert_eq!(route(10_000, 3.0), CanonicalGame::Cooperation);
        assert!(lower_bound_probe(99, 1.0).is_err());
    }

    #[test]
    fn invariant_matches_closed_form() {
        let r = probe_game(CanonicalGame::Invariant, 5000, 0.05).unwrap();
        let c = r.closed_form_regret.unwrap();
        assert!((r.player1_regret - c).abs() < 1e-9 * c);
    }

    #[test]
    fn cooperation_corridor() {
        let r = probe_game(CanonicalGame::Cooperation, 1000, 4.0).unwrap();
        assert!(r.corridor.unwrap().holds);
        assert!(r.min_round_loss.unwrap() > 0.0);
        assert!(r.player1_regret >= 0.1 * 1000.0);
    }
}
