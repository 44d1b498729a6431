use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regretlab::audit::audit_trace;
use regretlab::checks::{markov_oracle, perturbation_bound, swap_oracle};
use regretlab::config::{builtin, ExperimentConfig, BUILTINS};
use regretlab::experiment::{run_experiment, write_outputs};
use regretlab::probe::{lower_bound_probe, probe_game};
use regretlab::{gamefile, tracefile, AppError, Result};
use regretlab_core::dynamics::{default_checkpoints, regret_report};
use regretlab_core::{run, CanonicalGame};

#[derive(Parser)]
#[command(name = "regretlab", version, about = "No-regret learning dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one run and write its trace.
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Arm to run (defaults to the first).
        #[arg(long)]
        arm: Option<String>,
        /// Number of rounds (defaults to the largest grid value).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep a configuration over its horizon grid and seeds.
    Experiment {
        #[command(flatten)]
        source: ConfigSource,
        /// Replace the configured seeds with `seed, seed+1, …` (same count).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report regrets of raw-scale games in raw units.
        #[arg(long)]
        raw: bool,
    },
    /// Check regret inequalities and invariants on a stored trace.
    Audit {
        /// Trace CSV; its `.json` sidecar must sit next to it.
        trace: PathBuf,
    },
    /// Cross-check the stationary solver and swap regret against brute force.
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Run the vanilla-Hedge lower-bound probe.
    Probe {
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        eta: f64,
        /// Force a game instead of routing on the learning rate.
        #[arg(long)]
        game: Option<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Experiment configuration file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in configuration.
    #[arg(long)]
    builtin: Option<String>,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, &self.builtin) {
            (Some(path), _) => ExperimentConfig::load(path),
            (None, Some(name)) => builtin(name).ok_or_else(|| {
                AppError::Validation(format!("unknown built-in `{name}`; available: {}", BUILTINS.join(", ")))
            }),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // A closed pipe (e.g. `| head`) is not an error.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(AppError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn simulate(config: &ExperimentConfig, arm: Option<&str>, rounds: Option<usize>, seed: u64, out: &Path) -> Result<()> {
    let arm = match arm {
        Some(label) => config
            .arms
            .iter()
            .find(|a| a.label == label)
            .ok_or_else(|| AppError::Validation(format!("no arm labelled `{label}`")))?,
        None => &config.arms[0],
    };
    let rounds = rounds.unwrap_or(*config.t_grid.last().expect("validated grid"));
    let cell = arm.game.build(seed)?;
    let configs = arm.learner_configs(cell.game.num_players())?;
    let trace = run(&cell.game, &configs, rounds, seed)?;
    let path = out.join(format!("{}_{}_T{rounds}_seed{seed}.csv", config.name, sanitize(&arm.label)));
    tracefile::write(&trace, &path, Some(gamefile::to_json(&cell.game)))?;
    let report = regret_report(&trace, &default_checkpoints(rounds));
    print_json(&serde_json::json!({
        "trace": path,
        "units": "unit",
        "external_regret": report.external,
        "swap_regret": report.swap,
        "best_action": report.best_action,
        "best_swap": report.best_swap,
    }))
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            source,
            arm,
            rounds,
            seed,
            out,
        } => simulate(&source.load()?, arm.as_deref(), rounds, seed, &out),
        Command::Experiment {
            source,
            seed,
            jobs,
            out,
            raw,
        } => {
            let mut config = source.load()?;
            if let Some(base) = seed {
                let k = config.seeds.len() as u64;
                config.seeds = (base..base + k).collect();
            }
            config.raw |= raw;
            let result = run_experiment(&config, jobs.max(1))?;
            let dir = out.or(config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let (csv, json) = write_outputs(&result, &dir)?;
            for arm in &result.arms {
                match &arm.fit {
                    Some(f) => eprintln!("{}: slope {:.4} (r² {:.4})", arm.label, f.slope, f.r_squared),
                    None => eprintln!("{}: no fit ({})", arm.label, arm.fit_error.as_deref().unwrap_or("")),
                }
            }
            eprintln!("wrote {} and {}", csv.display(), json.display());
            Ok(())
        }
        Command::Audit { trace } => {
            let (t, meta) = tracefile::read(&trace)?;
            let game = meta.game.as_ref().map(gamefile::from_json).transpose()?;
            let report = audit_trace(&t, game.as_ref());
            print_json(&report)?;
            match report.failures() {
                0 => Ok(()),
                failed => Err(AppError::AuditFailed {
                    failed,
                    total: report.checks.len(),
                }),
            }
        }
        Command::Oracle { seed, trials } => {
            let mut summaries = Vec::new();
            for n in 2..=5 {
                summaries.push(markov_oracle(n, trials, seed, 1e-9)?);
            }
            for n in 2..=4 {
                summaries.push(perturbation_bound(n, trials, seed)?);
                summaries.push(swap_oracle(n, trials, 50, seed));
            }
            print_json(&summaries)?;
            let failed = summaries.iter().filter(|s| !s.passed()).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(AppError::AuditFailed {
                    failed,
                    total: summaries.len(),
                })
            }
        }
        Command::Probe { rounds, eta, game } => {
            let report = match game {
                Some(name) => {
                    let which = CanonicalGame::from_name(&name)
                        .ok_or_else(|| {
                        AppError::Validation(format!(
                            "unknown canonical game `{name}`; available: matching_pennies_G1, invariant_G2, cooperation_G3"
                        ))
                    })?;
                    probe_game(which, rounds, eta)?
                }
                None => lower_bound_probe(rounds, eta)?,
            };
            print_json(&report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as invalid input.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
