//! Experiment harness, file formats and command-line front end for
//! [`regretlab_core`].

pub mod audit;
pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod gamefile;
pub mod probe;
pub mod tracefile;

pub use error::{AppError, Result};
