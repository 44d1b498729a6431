//! Experiment configuration files.
//!
//! ```json
//! {
//!   "name": "thm31",
//!   "arms": [{"label": "random_10x10",
//!             "game": {"kind": "random", "players": 2, "actions": 10},
//!             "learners": [{"kind": "optimistic", "eta": {"theorem": "two_player_opt"}}]}],
//!   "t_grid": [1024, 2048, 4096, 8192],
//!   "seeds": [0, 1, 2],
//!   "metric": "max_external_regret"
//! }
//! ```
//!
//! A single learner entry is used by every player. Random and smooth games
//! are regenerated from each cell's seed.

use std::path::{Path, PathBuf};

use regretlab_core::{
    canonical_game, random_game, smooth_congestion_game, CanonicalGame, EtaRule, EtaTheorem, Game, HedgeVariant,
    LearnerConfig, LearnerKind, MetaMode, MixedStrategy, SmoothGameSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const MIN_GRID_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub arms: Vec<ArmConfig>,
    pub t_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub metric: Metric,
    /// Report regrets of raw-scale games in their native units.
    #[serde(default)]
    pub raw: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    pub label: String,
    pub game: GameSource,
    pub learners: Vec<LearnerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSource {
    Canonical { name: String },
    Random { players: usize, actions: usize },
    Smooth { players: usize, resources: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerName,
    pub eta: EtaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerName {
    Vanilla,
    Optimistic,
    Bm,
    RobustBm,
    MetaFull,
    MetaSingle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaSpec {
    Fixed(f64),
    Theorem(String),
    HorizonPower { coefficient: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `max_i` external regret after `T` rounds.
    MaxExternalRegret,
    /// `max_{T' ∈ [T, T + ⌊√T⌋]} max_i` external regret; step sizes use `T`.
    WindowMaxRegret,
    /// `max_i` swap regret after `T` rounds.
    MaxSwapRegret,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::MaxExternalRegret => "max_external_regret",
            Metric::WindowMaxRegret => "window_max_regret",
            Metric::MaxSwapRegret => "max_swap_regret",
        }
    }
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn power_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the line they refer to.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| AppError::Config {
            path: path.into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|(key, message)| {
            let (line, column) = locate(text, key);
            AppError::Config {
                path: path.into(),
                line,
                column,
                message,
            }
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Checks semantic constraints; on failure returns the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.t_grid.len() < MIN_GRID_POINTS {
            return Err(("t_grid", format!("t_grid needs at least {MIN_GRID_POINTS} points for a slope fit")));
        }
        if self.t_grid[0] == 0 || self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(("t_grid", "t_grid must be positive and strictly increasing".into()));
        }
        if self.seeds.is_empty() {
            return Err(("seeds", "at least one seed is required".into()));
        }
        if self.arms.is_empty() {
            return Err(("arms", "at least one arm is required".into()));
        }
        for (k, arm) in self.arms.iter().enumerate() {
            if self.arms[..k].iter().any(|a| a.label == arm.label) {
                return Err(("label", format!("duplicate arm label `{}`", arm.label)));
            }
            let (players, actions) = match &arm.game {
                GameSource::Canonical { name } => {
                    if CanonicalGame::from_name(name).is_none() {
                        return Err(("name", format!("unknown canonical game `{name}`")));
                    }
                    (2, 2)
                }
                GameSource::Random { players, actions } => (*players, *actions),
                GameSource::Smooth { players, resources } => (*players, *resources),
                GameSource::File { .. } => (0, 0),
            };
            if matches!(arm.game, GameSource::Random { .. } | GameSource::Smooth { .. })
                && (players < 2 || actions < 1)
            {
                return Err(("game", format!("arm `{}`: need at least 2 players and 1 action", arm.label)));
            }
            if arm.learners.is_empty() || (arm.learners.len() != 1 && players != 0 && arm.learners.len() != players) {
                return Err((
                    "learners",
                    format!("arm `{}`: give one learner for all players or one per player", arm.label),
                ));
            }
            for spec in &arm.learners {
                match &spec.eta {
                    EtaSpec::Theorem(name) if EtaTheorem::from_name(name).is_none() => {
                        return Err(("theorem", format!("unknown theorem rate `{name}`")));
                    }
                    EtaSpec::Fixed(eta) if !(*eta > 0.0 && eta.is_finite()) => {
                        return Err(("fixed", format!("fixed learning rate must be positive, got {eta}")));
                    }
                    _ => {}
                }
                if let Some(x) = &spec.initial {
                    if !matches!(spec.kind, LearnerName::Vanilla | LearnerName::Optimistic) {
                        return Err(("initial", "only Hedge learners take an initial strategy".into()));
                    }
                    if MixedStrategy::new(x.clone()).is_err() {
                        return Err(("initial", "initial strategy is not a probability vector".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// 1-based line and column of the first `"key"` in `text`, or (1, 1).
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1)))
        .unwrap_or((1, 1))
}

/// A game instantiated for one cell, with the smoothness data when available.
pub struct CellGame {
    pub game: Game,
    pub smooth: Option<SmoothGameSpec>,
}

impl GameSource {
    pub fn build(&self, seed: u64) -> Result<CellGame> {
        Ok(match self {
            GameSource::Canonical { name } => CellGame {
                game: canonical_game(
                    CanonicalGame::from_name(name)
                        .ok_or_else(|| AppError::Validation(format!("unknown canonical game `{name}`")))?,
                ),
                smooth: None,
            },
            GameSource::Random { players, actions } => CellGame {
                game: random_game(*players, *actions, seed)?,
                smooth: None,
            },
            GameSource::Smooth { players, resources } => {
                let spec = smooth_congestion_game(*players, *resources, seed)?;
                CellGame {
                    game: spec.game.clone(),
                    smooth: Some(spec),
                }
            }
            GameSource::File { path } => CellGame {
                game: crate::gamefile::read(path)?,
                smooth: None,
            },
        })
    }
}

impl LearnerSpec {
    pub fn to_core(&self) -> Result<LearnerConfig> {
        let eta = match &self.eta {
            EtaSpec::Fixed(v) => EtaRule::Fixed(*v),
            EtaSpec::Theorem(name) => EtaRule::Theorem(
                EtaTheorem::from_name(name)
                    .ok_or_else(|| AppError::Validation(format!("unknown theorem rate `{name}`")))?,
            ),
            EtaSpec::HorizonPower { coefficient, exponent } => EtaRule::HorizonPower {
                coefficient: *coefficient,
                exponent: *exponent,
            },
        };
        let kind = match self.kind {
            LearnerName::Vanilla | LearnerName::Optimistic => LearnerKind::Hedge {
                variant: if self.kind == LearnerName::Vanilla {
                    HedgeVariant::Vanilla
                } else {
                    HedgeVariant::Optimistic
                },
                initial: self.initial.clone().map(MixedStrategy::new).transpose()?,
            },
            LearnerName::Bm => LearnerKind::Bm,
            LearnerName::RobustBm => LearnerKind::RobustBm,
            LearnerName::MetaFull => LearnerKind::MetaExpert { mode: MetaMode::Full },
            LearnerName::MetaSingle => LearnerKind::MetaExpert {
                mode: MetaMode::SingleCoordinate,
            },
        };
        Ok(LearnerConfig { kind, eta })
    }
}

impl LearnerSpec {
    /// Inverse of [`LearnerSpec::to_core`].
    pub fn from_core(config: &LearnerConfig) -> Self {
        let eta = match config.eta {
            EtaRule::Fixed(v) => EtaSpec::Fixed(v),
            EtaRule::Theorem(k) => EtaSpec::Theorem(k.name().into()),
            EtaRule::HorizonPower { coefficient, exponent } => EtaSpec::HorizonPower { coefficient, exponent },
        };
        let (kind, initial) = match &config.kind {
            LearnerKind::Hedge { variant, initial } => (
                match variant {
                    HedgeVariant::Vanilla => LearnerName::Vanilla,
                    HedgeVariant::Optimistic => LearnerName::Optimistic,
                },
                initial.as_ref().map(|x| x.probs().to_vec()),
            ),
            LearnerKind::Bm => (LearnerName::Bm, None),
            LearnerKind::RobustBm => (LearnerName::RobustBm, None),
            LearnerKind::MetaExpert { mode: MetaMode::Full } => (LearnerName::MetaFull, None),
            LearnerKind::MetaExpert {
                mode: MetaMode::SingleCoordinate,
            } => (LearnerName::MetaSingle, None),
        };
        LearnerSpec { kind, eta, initial }
    }
}

impl ArmConfig {
    pub fn learner_configs(&self, players: usize) -> Result<Vec<LearnerConfig>> {
        let specs: Vec<LearnerConfig> = self.learners.iter().map(LearnerSpec::to_core).collect::<Result<_>>()?;
        match specs.len() {
            1 => Ok(vec![specs[0].clone(); players]),
            k if k == players => Ok(specs),
            k => Err(AppError::Validation(format!(
                "arm `{}` lists {k} learners for a {players}-player game",
                self.label
            ))),
        }
    }
}

fn spec(kind: LearnerName, eta: EtaSpec, initial: Option<Vec<f64>>) -> LearnerSpec {
    LearnerSpec { kind, eta, initial }
}

pub const BUILTINS: [&str; 4] = ["thm31", "thm41", "thm51", "thm51_actions"];

/// The built-in experiment configurations.
pub fn builtin(name: &str) -> Option<ExperimentConfig> {
    let grid = power_grid(10, 16);
    let seeds: Vec<u64> = (0..10).collect();
    let theorem = |k: EtaTheorem| EtaSpec::Theorem(k.name().into());
    let bm_arm = |players: usize, actions: usize| ArmConfig {
        label: format!("m{players}_n{actions}"),
        game: GameSource::Random { players, actions },
        learners: vec![spec(LearnerName::Bm, theorem(EtaTheorem::BmSwap), None)],
    };
    let config = match name {
        "thm31" => ExperimentConfig {
            name: name.into(),
            arms: vec![ArmConfig {
                label: "random_10x10".into(),
                game: GameSource::Random { players: 2, actions: 10 },
                learners: vec![spec(LearnerName::Optimistic, theorem(EtaTheorem::TwoPlayerOptimistic), None)],
            }],
            t_grid: grid,
            seeds,
            metric: Metric::MaxExternalRegret,
            raw: false,
            output_dir: None,
        },
        "thm41" => {
            let start = Some(vec![0.4, 0.6]);
            let arm = |label: &str, eta: EtaSpec| ArmConfig {
                label: label.into(),
                game: GameSource::Canonical {
                    name: CanonicalGame::MatchingPennies.name().into(),
                },
                learners: vec![spec(LearnerName::Vanilla, eta, start.clone())],
            };
            ExperimentConfig {
                name: name.into(),
                arms: vec![
                    arm("eta_1", EtaSpec::Fixed(1.0)),
                    arm(
                        "eta_T^-1/4",
                        EtaSpec::HorizonPower {
                            coefficient: 1.0,
                            exponent: -0.25,
                        },
                    ),
                ],
                t_grid: grid,
                // The dynamics are deterministic; one seed suffices.
                seeds: vec![0],
                metric: Metric::WindowMaxRegret,
                raw: true,
                output_dir: None,
            }
        }
        "thm51" => ExperimentConfig {
            name: name.into(),
            arms: vec![bm_arm(2, 4), bm_arm(3, 4)],
            t_grid: grid,
            seeds,
            metric: Metric::MaxSwapRegret,
            raw: false,
            output_dir: None,
        },
        "thm51_actions" => ExperimentConfig {
            name: name.into(),
            arms: vec![bm_arm(2, 4), bm_arm(2, 10)],
            t_grid: grid,
            seeds,
            metric: Metric::MaxSwapRegret,
            raw: false,
            output_dir: None,
        },
        _ => return None,
    };
    Some(config)
}
