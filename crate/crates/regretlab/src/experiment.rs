//! Seeded sweeps over a grid of horizons, with per-cell metrics and slope
//! fits of the seed-averaged metric.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use regretlab_core::dynamics::{max_player_regret_curve, swap_regret};
use regretlab_core::{run_with_horizon, Scale};
use serde::Serialize;

use crate::config::{ArmConfig, ExperimentConfig, Metric};
use crate::error::{AppError, Result};
use crate::fit::{fit_slope, SlopeFit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub arm: String,
    pub t: usize,
    pub seed: u64,
    /// Step sizes in the game's native units, one per player.
    pub etas: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub t: usize,
    /// Mean over cells with a positive metric.
    pub mean: Option<f64>,
    pub included: usize,
    /// Cells left out because their metric was not positive.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub label: String,
    pub points: Vec<PointSummary>,
    pub fit: Option<SlopeFit>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub metric: &'static str,
    pub units: &'static str,
    pub cells: Vec<CellResult>,
    pub arms: Vec<ArmSummary>,
}

/// Runs one `(arm, T, seed)` cell and returns the metric and native step sizes.
pub fn cell_metric(arm: &ArmConfig, metric: Metric, raw: bool, t: usize, seed: u64) -> Result<(f64, Vec<f64>)> {
    let cell = arm.game.build(seed)?;
    let game = &cell.game;
    let configs = arm.learner_configs(game.num_players())?;
    let rounds = match metric {
        Metric::WindowMaxRegret => t + (t as f64).sqrt() as usize,
        _ => t,
    };
    let trace = run_with_horizon(game, &configs, rounds, t, seed)?;
    let unit_value = match metric {
        Metric::MaxExternalRegret => max_player_regret_curve(&trace).last().copied().unwrap_or(0.0),
        Metric::WindowMaxRegret => max_player_regret_curve(&trace)[t.max(1) - 1..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        Metric::MaxSwapRegret => (0..trace.num_players)
            .map(|i| swap_regret(&trace, i, t).0)
            .fold(f64::NEG_INFINITY, f64::max),
    };
    let value = if raw { trace.to_native_regret(unit_value) } else { unit_value };
    let etas = (0..trace.num_players).map(|i| trace.native_eta(i)).collect();
    Ok((value, etas))
}

fn units(config: &ExperimentConfig) -> Result<&'static str> {
    if !config.raw {
        return Ok(Scale::Unit.name());
    }
    // Raw reporting is only meaningful when every arm shares one scale.
    let scales = config
        .arms
        .iter()
        .map(|a| Ok(a.game.build(0)?.game.scale()))
        .collect::<Result<Vec<_>>>()?;
    Ok(if scales.iter().all(|&s| s == Scale::Raw) {
        Scale::Raw.name()
    } else if scales.iter().all(|&s| s == Scale::Unit) {
        Scale::Unit.name()
    } else {
        "native"
    })
}

pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    config.validate().map_err(|(_, msg)| AppError::Validation(msg))?;
    let keys: Vec<(usize, usize, u64)> = (0..config.arms.len())
        .flat_map(|a| config.t_grid.iter().flat_map(move |&t| config.seeds.iter().map(move |&s| (a, t, s))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::Validation(format!("thread pool: {e}")))?;
    let cells: Vec<CellResult> = pool.install(|| {
        keys.par_iter()
            .map(|&(a, t, seed)| {
                let arm = &config.arms[a];
                let (value, etas) = cell_metric(arm, config.metric, config.raw, t, seed)?;
                log::debug!("{} T={t} seed={seed}: {value}", arm.label);
                Ok(CellResult {
                    arm: arm.label.clone(),
                    t,
                    seed,
                    etas,
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let arms = config
        .arms
        .iter()
        .map(|arm| {
            let points: Vec<PointSummary> = config
                .t_grid
                .iter()
                .map(|&t| {
                    let vals: Vec<f64> = cells
                        .iter()
                        .filter(|c| c.arm == arm.label && c.t == t)
                        .map(|c| c.value)
                        .collect();
                    let good: Vec<f64> = vals.iter().copied().filter(|&v| v > 0.0).collect();
                    PointSummary {
                        t,
                        mean: (!good.is_empty()).then(|| good.iter().sum::<f64>() / good.len() as f64),
                        included: good.len(),
                        excluded: vals.len() - good.len(),
                    }
                })
                .collect();
            let pairs: Vec<(f64, f64)> = points
                .iter()
                .map(|p| (p.t as f64, p.mean.unwrap_or(0.0)))
                .collect();
            let (fit, fit_error) = match fit_slope(&pairs) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ArmSummary {
                label: arm.label.clone(),
                points,
                fit,
                fit_error,
            }
        })
        .collect();
    Ok(ExperimentResult {
        name: config.name.clone(),
        metric: config.metric.name(),
        units: units(config)?,
        cells,
        arms,
    })
}

pub fn metrics_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["arm", "T", "seed", "metric", "value", "etas"])?;
    for c in &result.cells {
        let etas: Vec<String> = c.etas.iter().map(|e| e.to_string()).collect();
        w.write_record([
            c.arm.clone(),
            c.t.to_string(),
            c.seed.to_string(),
            result.metric.to_string(),
            c.value.to_string(),
            etas.join(";"),
        ])?;
    }
    w.into_inner().map_err(|e| AppError::Validation(e.to_string()))
}

pub fn summary_json(result: &ExperimentResult) -> Result<String> {
    #[derive(Serialize)]
    struct Summary<'a> {
        name: &'a str,
        metric: &'a str,
        units: &'a str,
        arms: &'a [ArmSummary],
    }
    Ok(serde_json::to_string_pretty(&Summary {
        name: &result.name,
        metric: result.metric,
        units: result.units,
        arms: &result.arms,
    })? + "\n")
}

/// Writes `<name>_metrics.csv` and `<name>_summary.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let csv_path = dir.join(format!("{}_metrics.csv", result.name));
    let json_path = dir.join(format!("{}_summary.json", result.name));
    std::fs::write(&csv_path, metrics_csv(result)?).map_err(|e| AppError::io(&csv_path, e))?;
    std::fs::write(&json_path, summary_json(result)?).map_err(|e| AppError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin;

    #[test]
    fn small_sweep_is_reproducible() {
        let mut c = builtin("thm31").unwrap();
        c.t_grid = vec![16, 32, 64, 128];
        c.seeds = vec![0, 1, 2];
        let a = run_experiment(&c, 2).unwrap();
        let b = run_experiment(&c, 1).unwrap();
        assert_eq!(metrics_csv(&a).unwrap(), metrics_csv(&b).unwrap());
        assert_eq!(summary_json(&a).unwrap(), summary_json(&b).unwrap());
        assert_eq!(a.cells.len(), 12);
        let p = &a.arms[0].points[0];
        assert_eq!(p.included + p.excluded, 3);
    }

    #[test]
    fn raw_units_double_regret() {
        let mut c = builtin("thm41").unwrap();
        c.t_grid = vec![16, 32, 64, 128];
        let raw = run_experiment(&c, 1).unwrap();
        c.raw = false;
        let unit = run_experiment(&c, 1).unwrap();
        assert_eq!(raw.units, "raw");
        for (r, u) in raw.cells.iter().zip(&unit.cells) {
            assert_eq!(r.value, 2.0 * u.value);
        }
    }
}
