//! Simultaneous-move repeated play and the accounting done on its record.
//!
//! A [`Trace`] stores, for every round, each player's mixed strategy, the
//! expected loss vector it faced (in `[0, 1]` units) and the expected loss
//! it incurred. Regret and diagnostic quantities are pure functions of a
//! finished trace; see [`regret`] and [`diagnostics`].

pub mod diagnostics;
pub mod regret;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::games::{Game, Scale};
use crate::learners::{theorem_eta, EtaTheorem, HedgeState, HedgeVariant, RobustBmState};
use crate::strategy::{LossVector, MixedStrategy};
use crate::swap::{BmState, MetaExpertState, MetaMode};

pub use diagnostics::{
    bm_swap_bound, cumulative_native_losses, kl_from_log_odds, kl_increment_bound, kl_to_center, meta_swap_bound, poa_report,
    rvu_terms, trajectory_terms, PoaReport, RvuTerms, SwapBound, TrajectoryTerms,
};
pub use regret::{
    default_checkpoints, external_regret, external_regret_curve, max_player_regret_curve, regret_report,
    swap_regret, swap_regret_curve, Checkpoint, RegretReport,
};

/// How a learner's step size is chosen. Values are in the game's native
/// loss units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    Fixed(f64),
    /// A closed-form theorem rate evaluated at the run's horizon.
    Theorem(EtaTheorem),
    /// `coefficient · T^exponent`.
    HorizonPower { coefficient: f64, exponent: f64 },
}

impl EtaRule {
    pub fn resolve(&self, actions: usize, players: usize, horizon: usize) -> Result<f64> {
        let eta = match *self {
            EtaRule::Fixed(eta) => eta,
            EtaRule::Theorem(kind) => theorem_eta(kind, actions, players, horizon.max(1)),
            EtaRule::HorizonPower { coefficient, exponent } => {
                coefficient * libm::pow(horizon.max(1) as f64, exponent)
            }
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!("learning rate must be positive, got {eta}")));
        }
        Ok(eta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnerKind {
    Hedge {
        variant: HedgeVariant,
        initial: Option<MixedStrategy>,
    },
    /// Blum–Mansour reduction over optimistic Hedge.
    Bm,
    /// The doubling wrapper around [`LearnerKind::Bm`]; the rate is its cap.
    RobustBm,
    MetaExpert { mode: MetaMode },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub eta: EtaRule,
}

impl LearnerConfig {
    pub fn hedge(variant: HedgeVariant, eta: EtaRule) -> Self {
        LearnerConfig {
            kind: LearnerKind::Hedge { variant, initial: None },
            eta,
        }
    }

    pub fn vanilla(eta: EtaRule) -> Self {
        Self::hedge(HedgeVariant::Vanilla, eta)
    }

    pub fn optimistic(eta: EtaRule) -> Self {
        Self::hedge(HedgeVariant::Optimistic, eta)
    }

    pub fn bm(eta: EtaRule) -> Self {
        LearnerConfig { kind: LearnerKind::Bm, eta }
    }

    pub fn meta(mode: MetaMode, eta: EtaRule) -> Self {
        LearnerConfig {
            kind: LearnerKind::MetaExpert { mode },
            eta,
        }
    }

    pub fn with_initial(mut self, x: MixedStrategy) -> Self {
        if let LearnerKind::Hedge { initial, .. } = &mut self.kind {
            *initial = Some(x);
        }
        self
    }

    pub fn is_optimistic_hedge(&self) -> bool {
        matches!(
            self.kind,
            LearnerKind::Hedge {
                variant: HedgeVariant::Optimistic,
                ..
            }
        )
    }
}

#[derive(Debug, Clone)]
enum Learner {
    Hedge(HedgeState),
    Bm(BmState),
    RobustBm(RobustBmState),
    Meta(MetaExpertState),
}

impl Learner {
    fn new(config: &LearnerConfig, n: usize, unit_eta: f64) -> Result<Self> {
        Ok(match &config.kind {
            LearnerKind::Hedge { variant, initial } => {
                Learner::Hedge(HedgeState::new(n, unit_eta, *variant, initial.clone())?)
            }
            LearnerKind::Bm => Learner::Bm(BmState::new(n, unit_eta)?),
            LearnerKind::RobustBm => Learner::RobustBm(RobustBmState::new(n, unit_eta)?),
            LearnerKind::MetaExpert { mode } => Learner::Meta(MetaExpertState::new(n, unit_eta, *mode)?),
        })
    }

    fn strategy(&self) -> &MixedStrategy {
        match self {
            Learner::Hedge(s) => s.strategy(),
            Learner::Bm(s) => s.strategy(),
            Learner::RobustBm(s) => s.strategy(),
            Learner::Meta(s) => s.strategy(),
        }
    }

    fn step(&mut self, loss: &LossVector) -> Result<()> {
        match self {
            Learner::Hedge(s) => s.step(loss),
            Learner::Bm(s) => s.step(loss).map(drop),
            Learner::RobustBm(s) => s.step(loss).map(drop),
            Learner::Meta(s) => s.step(loss).map(drop),
        }
    }
}

/// One round of play.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub strategies: Vec<MixedStrategy>,
    /// Expected loss vectors in `[0, 1]` units.
    pub losses: Vec<LossVector>,
    /// `⟨x_i, ℓ_i⟩` in `[0, 1]` units.
    pub realized: Vec<f64>,
}

/// The complete record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub num_players: usize,
    pub num_actions: usize,
    /// Units of the game that produced the trace; the recorded losses are
    /// always `[0, 1]`.
    pub scale: Scale,
    pub configs: Vec<LearnerConfig>,
    /// Step size each learner actually used, in `[0, 1]` loss units.
    pub etas: Vec<f64>,
    pub seed: u64,
    pub rounds: Vec<Round>,
    /// Strategies the learners would play in round `T + 1`.
    pub final_strategies: Vec<MixedStrategy>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `x_i^t` for `t ∈ [1, T + 1]`.
    pub fn strategy_at(&self, player: usize, t: usize) -> &MixedStrategy {
        assert!(t >= 1 && t <= self.len() + 1, "round {t} outside [1, T + 1]");
        if t == self.len() + 1 {
            &self.final_strategies[player]
        } else {
            &self.rounds[t - 1].strategies[player]
        }
    }

    /// `ℓ_i^t` in `[0, 1]` units for `t ∈ [1, T]`.
    pub fn loss_at(&self, player: usize, t: usize) -> &LossVector {
        &self.rounds[t - 1].losses[player]
    }

    /// The player's step size in native units.
    pub fn native_eta(&self, player: usize) -> f64 {
        self.etas[player] / self.scale.span()
    }

    /// Converts a `[0, 1]`-unit regret to native units.
    pub fn to_native_regret(&self, regret: f64) -> f64 {
        regret * self.scale.span()
    }
}

/// Plays `rounds` rounds of `game`; step sizes use `rounds` as the horizon.
pub fn run(game: &Game, configs: &[LearnerConfig], rounds: usize, seed: u64) -> Result<Trace> {
    run_with_horizon(game, configs, rounds, rounds, seed)
}

/// Plays `rounds` rounds with step sizes resolved for `horizon`.
///
/// Each round fixes every player's strategy, then evaluates all loss
/// vectors on that profile, and only then updates the learners. The dynamics
/// are deterministic; `seed` is recorded for provenance.
pub fn run_with_horizon(
    game: &Game,
    configs: &[LearnerConfig],
    rounds: usize,
    horizon: usize,
    seed: u64,
) -> Result<Trace> {
    let m = game.num_players();
    let n = game.num_actions();
    if configs.len() != m {
        return Err(Error::Dimension {
            what: "learner configs",
            expected: m,
            found: configs.len(),
        });
    }
    let span = game.scale().span();
    let etas = configs
        .iter()
        .map(|c| Ok(c.eta.resolve(n, m, horizon)? * span))
        .collect::<Result<Vec<f64>>>()?;
    let mut learners = configs
        .iter()
        .zip(&etas)
        .map(|(c, &eta)| Learner::new(c, n, eta))
        .collect::<Result<Vec<_>>>()?;

    let mut record = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let strategies: Vec<MixedStrategy> = learners.iter().map(|l| l.strategy().clone()).collect();
        let losses = (0..m)
            .map(|i| game.expected_loss_vector(i, &strategies))
            .collect::<Result<Vec<_>>>()?;
        let realized = strategies.iter().zip(&losses).map(|(x, l)| x.dot(l.values())).collect();
        for (learner, loss) in learners.iter_mut().zip(&losses) {
            learner.step(loss)?;
        }
        record.push(Round {
            strategies,
            losses,
            realized,
        });
    }
    Ok(Trace {
        num_players: m,
        num_actions: n,
        scale: game.scale(),
        configs: configs.to_vec(),
        etas,
        seed,
        rounds: record,
        final_strategies: learners.iter().map(|l| l.strategy().clone()).collect(),
    })
}

/// Runs a single learner against a fixed sequence of `[0, 1]` loss vectors.
pub fn run_against(config: &LearnerConfig, num_actions: usize, losses: &[LossVector], seed: u64) -> Result<Trace> {
    let eta = config.eta.resolve(num_actions, 2, losses.len())?;
    let mut learner = Learner::new(config, num_actions, eta)?;
    let mut record = Vec::with_capacity(losses.len());
    for loss in losses {
        if loss.len() != num_actions {
            return Err(Error::Dimension {
                what: "loss vector",
                expected: num_actions,
                found: loss.len(),
            });
        }
        let x = learner.strategy().clone();
        let realized = x.dot(loss.values());
        learner.step(loss)?;
        record.push(Round {
            strategies: alloc::vec![x],
            losses: alloc::vec![loss.clone()],
            realized: alloc::vec![realized],
        });
    }
    Ok(Trace {
        num_players: 1,
        num_actions,
        scale: Scale::Unit,
        configs: alloc::vec![config.clone()],
        etas: alloc::vec![eta],
        seed,
        rounds: record,
        final_strategies: alloc::vec![learner.strategy().clone()],
    })
}
