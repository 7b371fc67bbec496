//! Simulation optimization of Conditional Value-at-Risk with gradient-based
//! adaptive stochastic search, optionally with adaptive risk levels.
//!
//! The crate is organised bottom-up:
//!
//! - [`sampling`]: the diagonal Gaussian search distribution and its projection box
//! - [`risk`]: empirical VaR/CVaR estimators and the Gaussian CVaR oracle
//! - [`shape`]: the logistic shape function and elite quantile threshold
//! - [`schedule`]: adaptive risk levels and effective-sample-size budgets
//! - [`gass`]: the search engines
//! - [`benchmarks`]: noisy test losses and analytic oracles for `l_0`
//! - [`harness`]: experiment configuration, replication and CSV output

pub mod benchmarks;
pub mod error;
pub mod gass;
pub mod harness;
pub mod loss;
mod order;
pub mod risk;
pub mod sampling;
pub mod schedule;
pub mod shape;
pub mod stream;

pub use error::{Error, Result};
pub use loss::LossModel;
pub use stream::StreamSeed;
