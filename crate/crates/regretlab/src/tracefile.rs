//! Trace files: a long-format CSV with one row per
//! `(round, player, action)` and a JSON sidecar with run metadata.
//!
//! Loss values are in `[0, 1]` units. Floats are written in shortest
//! round-trip form, so reading a trace back reproduces it bit for bit.

use std::path::{Path, PathBuf};

use regretlab_core::dynamics::Round;
use regretlab_core::{LossVector, MixedStrategy, Scale, Trace};
use serde::{Deserialize, Serialize};

use crate::config::LearnerSpec;
use crate::error::{AppError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    /// Units of `loss_value` in the CSV; always `unit`.
    pub units: String,
    /// Scale of the game that produced the trace.
    pub game_scale: String,
    pub players: usize,
    pub actions: usize,
    pub rounds: usize,
    pub seed: u64,
    pub learners: Vec<LearnerSpec>,
    /// Step sizes as used on `[0, 1]` losses.
    pub etas: Vec<f64>,
    pub final_strategies: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    round: usize,
    player: usize,
    action: usize,
    strategy_prob: f64,
    loss_value: f64,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn sidecar(trace: &Trace) -> Sidecar {
    Sidecar {
        schema_version: SCHEMA_VERSION,
        units: Scale::Unit.name().into(),
        game_scale: trace.scale.name().into(),
        players: trace.num_players,
        actions: trace.num_actions,
        rounds: trace.len(),
        seed: trace.seed,
        learners: trace.configs.iter().map(LearnerSpec::from_core).collect(),
        etas: trace.etas.clone(),
        final_strategies: trace.final_strategies.iter().map(|x| x.probs().to_vec()).collect(),
        game: None,
    }
}

pub fn trace_csv(trace: &Trace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (t, r) in trace.rounds.iter().enumerate() {
        for (i, (x, l)) in r.strategies.iter().zip(&r.losses).enumerate() {
            for a in 0..trace.num_actions {
                w.serialize(Row {
                    round: t + 1,
                    player: i,
                    action: a,
                    strategy_prob: x[a],
                    loss_value: l[a],
                })?;
            }
        }
    }
    w.into_inner().map_err(|e| AppError::Validation(e.to_string()))
}

/// Writes `path` and its `.json` sidecar; `game` is embedded when given.
pub fn write(trace: &Trace, path: &Path, game: Option<serde_json::Value>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    std::fs::write(path, trace_csv(trace)?).map_err(|e| AppError::io(path, e))?;
    let mut meta = sidecar(trace);
    meta.game = game;
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| AppError::io(&side, e))
}

pub fn read(path: &Path) -> Result<(Trace, Sidecar)> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| AppError::io(&side, e))?;
    let meta: Sidecar = serde_json::from_str(&text)?;
    if meta.schema_version != SCHEMA_VERSION {
        return Err(AppError::Validation(format!(
            "unsupported trace schema version {} (expected {SCHEMA_VERSION})",
            meta.schema_version
        )));
    }
    let scale = Scale::from_name(&meta.game_scale)
        .ok_or_else(|| AppError::Validation(format!("unknown scale `{}`", meta.game_scale)))?;
    let (m, n) = (meta.players, meta.actions);
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut probs = vec![vec![vec![0.0; n]; m]; meta.rounds];
    let mut losses = probs.clone();
    let mut seen = 0usize;
    for row in csv::Reader::from_reader(file).deserialize() {
        let row: Row = row?;
        if row.round == 0 || row.round > meta.rounds || row.player >= m || row.action >= n {
            return Err(AppError::Validation(format!(
                "trace row (round {}, player {}, action {}) outside the declared shape",
                row.round, row.player, row.action
            )));
        }
        probs[row.round - 1][row.player][row.action] = row.strategy_prob;
        losses[row.round - 1][row.player][row.action] = row.loss_value;
        seen += 1;
    }
    if seen != meta.rounds * m * n {
        return Err(AppError::Validation(format!(
            "trace has {seen} rows, expected {}",
            meta.rounds * m * n
        )));
    }
    let rounds = probs
        .into_iter()
        .zip(losses)
        .map(|(xs, ls)| {
            let strategies = xs.into_iter().map(MixedStrategy::new).collect::<regretlab_core::Result<Vec<_>>>()?;
            let losses = ls.into_iter().map(LossVector::new).collect::<regretlab_core::Result<Vec<_>>>()?;
            let realized = strategies.iter().zip(&losses).map(|(x, l)| x.dot(l.values())).collect();
            Ok(Round {
                strategies,
                losses,
                realized,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = Trace {
        num_players: m,
        num_actions: n,
        scale,
        configs: meta.learners.iter().map(LearnerSpec::to_core).collect::<Result<_>>()?,
        etas: meta.etas.clone(),
        seed: meta.seed,
        rounds,
        final_strategies: meta
            .final_strategies
            .iter()
            .map(|x| MixedStrategy::new(x.clone()))
            .collect::<regretlab_core::Result<_>>()?,
    };
    Ok((trace, meta))
}
