//! Shapley attribution toolkit: exact Shapley values from cooperative-game
//! payoff tables, and Shapley value regression over marketing time series.
//!
//! Two pipelines share one solver core:
//!
//! - **Game**: a complete coalition payoff table (e.g. from a structured
//!   market test) → exact per-player Shapley values, shares, and
//!   channel-total extrapolation.
//! - **Regression**: a time-series design matrix (one column per partner,
//!   one outcome column) → R² of every partner coalition under standardized
//!   zero-intercept fits → Shapley importance, outcome attribution, and
//!   nonnegative per-partner coefficients.

pub mod cli;
pub mod data_io;
pub mod error;
pub mod game;
pub mod least_squares;
pub mod model;
pub mod regression;

#[cfg(test)]
pub(crate) mod test_data;

pub use error::{Error, Result};
