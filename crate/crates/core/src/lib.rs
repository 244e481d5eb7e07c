//! Analysis, validation, and optimization of spare-satellite management
//! policies for Walker-Delta constellations.
//!
//! The in-plane and parking-orbit stock levels are modeled as coupled
//! discrete-time Markov chains under `(r, q, tau)` replenishment policies,
//! solved jointly by fixed-point iteration over the parking availability
//! vector. On top of the stationary solution sit a cost/resilience
//! evaluator, a seeded Monte Carlo simulator for independent validation,
//! and a constrained genetic-algorithm design optimizer.
//!
//! Replication and population evaluation run data-parallel through rayon
//! when the default `parallel` feature is enabled; disabling it yields a
//! fully sequential build with bit-identical results.

pub mod config;
pub mod error;
pub mod exec;
pub mod inplane;
pub mod markov;
pub mod metrics;
pub mod optimize;
pub mod orbital;
pub mod parking;
pub mod policy;
pub mod report;
pub mod sim;
pub mod stochastic;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use error::{Error, Result};
