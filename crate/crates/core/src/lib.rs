//! Two-tier cellular network with Poisson macro cells and Matern-clustered
//! small cells parented on the macros, users confined to the cluster disks.
//!
//! The crate computes association probabilities, serving-distance densities
//! and the average ergodic rate analytically, and checks each against a
//! Monte Carlo simulation of the same geometry.
//!
//! - [`model`]: parameters and the `key = value` config format
//! - [`numerics`]: adaptive Gauss-Kronrod quadrature
//! - [`geometry`]: point-process samplers, nearest-distance queries
//! - [`distributions`]: contact and pair-distance laws
//! - [`association`]: tier association probabilities, loads, serving distance
//! - [`rate`]: interference Laplace transforms and ergodic rate
//! - [`montecarlo`]: the simulation oracle
//! - [`cli`]: the experiment runner behind the `hetnet` binary

pub mod association;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod rate;

pub use error::{Error, Result};
pub use model::{Config, DsModel, NetworkParams, Tier};
