//! Dynamic Black-Litterman portfolio library.
//!
//! Prices follow a multivariate geometric Brownian motion whose law is
//! conditioned on noisy linear views of future log-returns. The crate covers
//! the conditional dynamics, the generalized Brownian bridge behind them,
//! closed-form dynamic policies with hedging demand, several view-arrival
//! structures, and a Monte-Carlo lab comparing dynamic and rebalanced
//! single-period investors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bridge;
pub mod conditional;
pub mod error;
pub mod gaussian;
pub mod market;
pub mod mc;
pub mod ode;
pub mod plot;
pub mod policy;
pub mod presets;
pub mod rng;
pub mod scenario;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{DblError, Result};

/// Library version recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
