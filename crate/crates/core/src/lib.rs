//! Noise, fairness and accuracy for two-group binary classification.
//!
//! Closed-form Chernoff information for Gaussians ([`gaussian`]), telescoping
//! density-ratio estimation ([`dre`]), a neural Chernoff estimator ([`cine`]),
//! classifier sweeps with Pareto fairness-accuracy curves ([`classify`]),
//! the Gaussian-mechanism budget ([`privacy`]) and data loading ([`data`]).
//! The `triad` binary is a thin wrapper over [`cli`].

pub mod cine;
pub mod cli;
pub mod classify;
pub mod data;
pub mod density;
pub mod dre;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod optimize;
pub mod presets;
pub mod privacy;
pub mod rng;

pub use error::{Result, TriadError};

/// Crate version, stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
