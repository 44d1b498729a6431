//! Learning dynamics for repeated normal-form games.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerical
//! code: games and expected-loss evaluation, Hedge and optimistic Hedge,
//! the Blum–Mansour swap-regret reduction and the swap-matrix meta-expert,
//! exact stationary distributions of Markov chains, and the regret and
//! diagnostic accounting computed from a finished [`Trace`].
//!
//! File formats, the experiment harness and the command line live in the
//! `regretlab` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod games;
pub mod learners;
pub mod markov;
pub mod oracle;
pub mod strategy;
pub mod swap;

pub use dynamics::{run, run_against, run_with_horizon, EtaRule, LearnerConfig, LearnerKind, Trace};
pub use error::{Error, Result};
pub use games::{canonical_game, random_game, smooth_congestion_game, CanonicalGame, Game, Scale, SmoothGameSpec};
pub use learners::{theorem_eta, EtaTheorem, HedgeState, HedgeVariant, RobustBmState};
pub use markov::{certify_multiplicative, perturbation_gap, stationary, tree_stationary, MultiplicativeCert, StochasticMatrix};
pub use strategy::{LossVector, MixedStrategy};
pub use swap::{strategy_drift, BmState, MetaExpertState, MetaMode, SwapMatrix};
