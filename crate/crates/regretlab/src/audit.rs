//! Invariant checks over a stored trace.
//!
//! Which checks run depends on each player's learner; game-specific checks
//! run when the trace's sidecar embeds Matching Pennies.

use regretlab_core::dynamics::{
    bm_swap_bound, cumulative_native_losses, external_regret, kl_from_log_odds, kl_increment_bound, max_player_regret_curve,
    meta_swap_bound, rvu_terms, swap_regret, trajectory_terms,
};
use regretlab_core::swap::BM_STABLE_ETA;
use regretlab_core::{
    canonical_game, strategy_drift, CanonicalGame, Game, HedgeVariant, LearnerKind, MetaMode, MixedStrategy, Trace,
};
use serde::Serialize;

pub const AUDIT_TOL: f64 = 1e-9;

/// Multiplier of the path-length bound that the audit enforces.
pub const TRAJECTORY_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub player: Option<usize>,
    /// Right side minus left side of the audited inequality.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

fn check(name: &'static str, player: Option<usize>, slack: f64) -> Check {
    Check {
        name,
        player,
        slack,
        passed: slack >= -AUDIT_TOL,
    }
}

fn strategies(trace: &Trace, player: usize) -> Vec<MixedStrategy> {
    (1..=trace.len() + 1).map(|t| trace.strategy_at(player, t).clone()).collect()
}

pub fn audit_trace(trace: &Trace, game: Option<&Game>) -> AuditReport {
    let mut checks = Vec::new();
    let t = trace.len();
    for i in 0..trace.num_players {
        let p = Some(i);
        checks.push(check("swap_regret_dominates_external", p, swap_regret(trace, i, t).0 - external_regret(trace, i, t)));
        if let Ok(r) = rvu_terms(trace, i) {
            checks.push(check("rvu_bound", p, r.slack()));
        }
        if let Ok(tr) = trajectory_terms(trace, i) {
            checks.push(check("path_length_bound", p, tr.bound(TRAJECTORY_FACTOR) - tr.movement));
        }
        let eta = trace.etas[i];
        match trace.configs[i].kind {
            LearnerKind::Bm => {
                if let Ok(b) = bm_swap_bound(trace, i) {
                    checks.push(check("bm_swap_bound", p, b.slack()));
                }
                if eta <= BM_STABLE_ETA {
                    checks.push(check("bm_drift", p, 48.0 * eta - strategy_drift(&strategies(trace, i))));
                }
            }
            LearnerKind::MetaExpert { mode: MetaMode::Full } => {
                if let Ok(b) = meta_swap_bound(trace, i) {
                    checks.push(check("meta_swap_bound", p, b.slack()));
                }
                let n = trace.num_actions as f64;
                checks.push(check("meta_drift", p, 48.0 * n * eta - strategy_drift(&strategies(trace, i))));
            }
            _ => {}
        }
    }
    if game.is_some_and(|g| *g == canonical_game(CanonicalGame::MatchingPennies)) {
        checks.extend(matching_pennies_checks(trace));
    }
    AuditReport { checks }
}

/// Zero-sum bookkeeping, `max_i Regret_i ≥ |L_x|`, and KL growth for
/// vanilla Hedge with raw step at most 3.
fn matching_pennies_checks(trace: &Trace) -> Vec<Check> {
    let lx = cumulative_native_losses(trace, 0);
    let ly = cumulative_native_losses(trace, 1);
    let worst = max_player_regret_curve(trace);
    let zero_sum = lx.iter().zip(&ly).map(|(a, b)| -(a + b).abs()).fold(0.0, f64::min);
    let regret_vs_loss = lx
        .iter()
        .zip(&worst)
        .map(|(l, w)| trace.to_native_regret(*w) - l.abs())
        .fold(f64::INFINITY, f64::min);
    let mut out = vec![
        check("zero_sum_bookkeeping", None, zero_sum),
        check("regret_dominates_cumulative_loss", None, if lx.is_empty() { 0.0 } else { regret_vs_loss }),
    ];
    let vanilla = trace.configs.iter().all(|c| {
        matches!(
            c.kind,
            LearnerKind::Hedge {
                variant: HedgeVariant::Vanilla,
                ..
            }
        )
    });
    let eta = trace.native_eta(0);
    if vanilla && trace.native_eta(1) == eta && eta <= 3.0 && !trace.is_empty() {
        if let (Ok(kx), Ok(ky)) = (kl_from_log_odds(trace, 0), kl_from_log_odds(trace, 1)) {
            let mut slack = f64::INFINITY;
            for s in 1..=trace.len() {
                let (x, y) = (trace.strategy_at(0, s)[0], trace.strategy_at(1, s)[0]);
                let inc = kx[s] + ky[s] - kx[s - 1] - ky[s - 1];
                slack = slack.min(inc - kl_increment_bound(eta, x, y));
            }
            out.push(check("kl_increment_bound", None, slack));
        }
    }
    out
}
