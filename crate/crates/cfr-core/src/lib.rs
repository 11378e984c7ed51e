//! Computation-rate tuples for compute-and-forward relaying with per-user
//! transmit scaling.
//!
//! The library computes the achievable rate tuples at which relays can decode
//! integer linear combinations of lattice-coded messages, searches for good
//! integer coefficients, traces achievable rate regions over the scaling
//! parameters, and verifies the underlying nested-lattice algebra with a
//! scalar Monte-Carlo simulator.
//!
//! Conventions used throughout:
//! * real channels, unit-variance noise, logs base 2, rates in bits per real
//!   channel use;
//! * per-user scalings `beta` are strictly positive and only their ratios
//!   matter to the single-relay rate formula;
//! * rates are clamped at zero at the outermost step so that the per-user
//!   rate offset `log2(beta_k/beta_j)` stays visible in diagnostics.

pub mod coeff_search;
pub mod error;
pub mod lattice_sim;
pub mod linalg;
pub mod rates;
pub mod region;
pub mod scenarios;

pub use error::{Error, Result};
