//! Inequality audits and potential functions evaluated on a finished trace.
//!
//! Everything is in `[0, 1]` loss units with the step size the learner
//! actually used, except where a function says otherwise.

use alloc::format;
use alloc::vec::Vec;

use super::regret::{external_regret, swap_regret};
use super::{LearnerKind, Trace};
use crate::error::{Error, Result};
use crate::games::SmoothGameSpec;
use crate::learners::HedgeVariant;
use crate::swap::MetaMode;

/// Below this a probability is treated as zero by [`kl_to_center`].
pub const KL_FLOOR: f64 = 1e-300;

/// `D(u ‖ x_i^t)` with `u` uniform and natural logarithms; `t ∈ [1, T + 1]`.
///
/// Returns `+∞` when some coordinate of `x_i^t` is below [`KL_FLOOR`].
pub fn kl_to_center(trace: &Trace, player: usize, t: usize) -> f64 {
    let x = trace.strategy_at(player, t);
    let u = 1.0 / x.len() as f64;
    let mut d = 0.0;
    for &p in x.probs() {
        if p < KL_FLOOR {
            return f64::INFINITY;
        }
        d += u * libm::log(u / p);
    }
    d
}

/// `D(u ‖ x_i^t)` for `t ∈ [1, T + 1]` of a two-action vanilla-Hedge player,
/// computed from the log-odds `z_t = ln(x_t(1)/x_t(2))` rebuilt from the
/// recorded losses: `z_{t+1} = z_t − η(ℓ_t(1) − ℓ_t(2))`.
///
/// Unlike [`kl_to_center`] this stays finite when the recorded
/// probabilities underflow, because `D = −ln 2 + ½(softplus(z) + softplus(−z))`.
pub fn kl_from_log_odds(trace: &Trace, player: usize) -> Result<Vec<f64>> {
    let initial = match &trace.configs[player].kind {
        LearnerKind::Hedge {
            variant: HedgeVariant::Vanilla,
            initial,
        } if trace.num_actions == 2 => initial.clone(),
        _ => {
            return Err(Error::Parameter(format!(
                "player {player} is not a two-action vanilla Hedge learner"
            )))
        }
    };
    let eta = trace.etas[player];
    let mut z = initial.map_or(0.0, |x| libm::log(x[0]) - libm::log(x[1]));
    let kl = |z: f64| -core::f64::consts::LN_2 + 0.5 * (softplus(z) + softplus(-z));
    let mut out = Vec::with_capacity(trace.len() + 1);
    out.push(kl(z));
    for r in &trace.rounds {
        let l = r.losses[player].values();
        z -= eta * (l[0] - l[1]);
        out.push(kl(z));
    }
    Ok(out)
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Lower bound on the one-step growth of `D(x⋆‖x) + D(y⋆‖y)` for vanilla
/// Hedge on Matching Pennies, with `x`, `y` the probabilities of each
/// player's first action and `eta` in raw `[-1, 1]` units.
pub fn kl_increment_bound(eta: f64, x: f64, y: f64) -> f64 {
    let a = 2.0 * y - 1.0;
    let b = 2.0 * x - 1.0;
    libm::exp(-7.0) * eta * eta * (x * (1.0 - x) * a * a + y * (1.0 - y) * b * b)
}

/// Cumulative stored-unit losses `L_i^t = Σ_{τ≤t} ⟨x^τ, ℓ^τ⟩` after every round.
pub fn cumulative_native_losses(trace: &Trace, player: usize) -> Vec<f64> {
    let mut total = 0.0;
    trace
        .rounds
        .iter()
        .map(|r| {
            total += trace.scale.to_native(r.realized[player]);
            total
        })
        .collect()
}

/// `Σ_{t=from}^{to} ‖ℓ^t − ℓ^{t−1}‖∞^power` with `ℓ⁰ = 0`.
fn loss_variation(trace: &Trace, player: usize, from: usize, to: usize, power: i32) -> f64 {
    (from.max(1)..=to)
        .map(|t| {
            let cur = trace.loss_at(player, t).values();
            let d = if t == 1 {
                cur.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
            } else {
                crate::strategy::linf_distance(cur, trace.loss_at(player, t - 1).values())
            };
            libm::pow(d, power as f64)
        })
        .sum()
}

/// `Σ_{t=from}^{to} ‖x^t − x^{t−1}‖₁²`, for `2 ≤ from` and `to ≤ T + 1`.
fn movement(trace: &Trace, player: usize, from: usize, to: usize) -> f64 {
    (from.max(2)..=to)
        .map(|t| {
            let d = trace.strategy_at(player, t).l1_distance(trace.strategy_at(player, t - 1));
            d * d
        })
        .sum()
}

/// The four quantities of the optimistic-Hedge regret bound
/// `Regret ≤ 2 ln n/η + η Σ_t ‖ℓ^t − ℓ^{t−1}‖∞² − (1/4η) Σ_t ‖x^{t+1} − x^t‖₁²`,
/// sums over `t ∈ [1, T]`. For a non-uniform start `ln n` becomes
/// `ln(1 / min_j x¹(j))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvuTerms {
    pub regret: f64,
    pub log_term: f64,
    pub variation: f64,
    pub stability: f64,
}

impl RvuTerms {
    /// Right side minus left side; nonnegative when the bound holds.
    pub fn slack(&self) -> f64 {
        self.log_term + self.variation - self.stability - self.regret
    }
}

pub fn rvu_terms(trace: &Trace, player: usize) -> Result<RvuTerms> {
    if !trace.configs[player].is_optimistic_hedge() {
        return Err(Error::Parameter(format!("player {player} did not run optimistic Hedge")));
    }
    let eta = trace.etas[player];
    let t = trace.len();
    Ok(RvuTerms {
        regret: external_regret(trace, player, t),
        log_term: 2.0 * prior_log_term(trace, player) / eta,
        variation: eta * loss_variation(trace, player, 1, t, 2),
        stability: movement(trace, player, 2, t + 1) / (4.0 * eta),
    })
}

/// `ln(1 / min_j x¹(j))`, which is `ln n` for the uniform start.
fn prior_log_term(trace: &Trace, player: usize) -> f64 {
    match &trace.configs[player].kind {
        LearnerKind::Hedge { initial: Some(x), .. } => {
            -libm::log(x.probs().iter().copied().fold(f64::INFINITY, f64::min))
        }
        _ => libm::log(trace.num_actions as f64),
    }
}

/// Pieces of the path-length bound
/// `Σ_{t=2}^T ‖x^t − x^{t−1}‖₁² ≤ c·(2 ln n + (η + η²) Σ_{t=1}^{T−1} ‖ℓ^t − ℓ^{t−1}‖∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryTerms {
    pub movement: f64,
    pub log_term: f64,
    pub variation: f64,
}

impl TrajectoryTerms {
    /// The right side with multiplier `c`.
    pub fn bound(&self, multiplier: f64) -> f64 {
        multiplier * (self.log_term + self.variation)
    }
}

pub fn trajectory_terms(trace: &Trace, player: usize) -> Result<TrajectoryTerms> {
    if !trace.configs[player].is_optimistic_hedge() {
        return Err(Error::Parameter(format!("player {player} did not run optimistic Hedge")));
    }
    let eta = trace.etas[player];
    let t = trace.len();
    Ok(TrajectoryTerms {
        movement: movement(trace, player, 2, t),
        log_term: 2.0 * prior_log_term(trace, player),
        variation: (eta + eta * eta) * loss_variation(trace, player, 1, t.saturating_sub(1), 1),
    })
}

/// A swap-regret value and an upper bound it is audited against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapBound {
    pub regret: f64,
    pub bound: f64,
}

impl SwapBound {
    pub fn slack(&self) -> f64 {
        self.bound - self.regret
    }
}

/// `SwapRegret ≤ 2n ln n/η + 2η(Σ_{t≥2} ‖Δx‖₁² + Σ_{t≥1} ‖Δℓ‖∞²)` for the
/// Blum–Mansour learner.
pub fn bm_swap_bound(trace: &Trace, player: usize) -> Result<SwapBound> {
    if trace.configs[player].kind != LearnerKind::Bm {
        return Err(Error::Parameter(format!("player {player} did not run the BM learner")));
    }
    let eta = trace.etas[player];
    let n = trace.num_actions as f64;
    let t = trace.len();
    let moves = movement(trace, player, 2, t) + loss_variation(trace, player, 1, t, 2);
    Ok(SwapBound {
        regret: swap_regret(trace, player, t).0,
        bound: 2.0 * n * libm::log(n) / eta + 2.0 * eta * moves,
    })
}

/// `SwapRegret ≤ n ln n/η + 2η Σ_{t≥2} ‖Δx‖₁² + 2η Σ_{t≥2} ‖Δℓ‖∞²` for the
/// full meta-expert.
pub fn meta_swap_bound(trace: &Trace, player: usize) -> Result<SwapBound> {
    if trace.configs[player].kind != (LearnerKind::MetaExpert { mode: MetaMode::Full }) {
        return Err(Error::Parameter(format!("player {player} did not run the full meta-expert")));
    }
    let eta = trace.etas[player];
    let n = trace.num_actions as f64;
    let t = trace.len();
    let moves = movement(trace, player, 2, t) + loss_variation(trace, player, 2, t, 2);
    Ok(SwapBound {
        regret: swap_regret(trace, player, t).0,
        bound: n * libm::log(n) / eta + 2.0 * eta * moves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoaReport {
    /// `(1/T) Σ_t Σ_i L_i(x^t)`.
    pub avg_welfare: f64,
    /// `λ/(1−μ−ε)·OPT + (m/T)·(1/(1−μ−ε))·(n ln n/ε)`.
    pub bound: f64,
    pub opt: f64,
}

pub fn poa_report(trace: &Trace, spec: &SmoothGameSpec, eps: f64) -> Result<PoaReport> {
    let gap = 1.0 - spec.mu - eps;
    if !(eps > 0.0 && gap > 0.0) {
        return Err(Error::Parameter(format!("eps must lie in (0, 1 − μ) = (0, {}), got {eps}", 1.0 - spec.mu)));
    }
    if trace.is_empty() {
        return Err(Error::Parameter("price-of-anarchy report needs at least one round".into()));
    }
    let t = trace.len() as f64;
    let m = trace.num_players as f64;
    let n = trace.num_actions as f64;
    let total: f64 = trace
        .rounds
        .iter()
        .map(|r| r.realized.iter().map(|&u| trace.scale.to_native(u)).sum::<f64>())
        .sum();
    Ok(PoaReport {
        avg_welfare: total / t,
        bound: spec.lambda / gap * spec.opt + m / t / gap * (n * libm::log(n) / eps),
        opt: spec.opt,
    })
}
