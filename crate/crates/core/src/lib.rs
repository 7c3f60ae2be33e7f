//! Set-valued systemic risk measures.
//!
//! Given a capital-indexed value model `k -> Y_k` over shared Monte Carlo
//! scenarios and a scalar acceptance criterion, this crate approximates the
//! set of capital allocations that make the system acceptable and extracts
//! efficient allocation rules from it.
//!
//! * [`scenarios`]: Gaussian-copula risk factors with lognormal or Beta margins.
//! * [`acceptance`]: AV@R, shortfall risk, optimized certainty equivalents.
//! * [`aggregation`]: value models over aggregation functions.
//! * [`clearing`]: network clearing with fire sales, and its value model.
//! * [`network_gen`]: grouped random liability networks.
//! * [`riskmeasure`]: grid search, refinement and allocation rules.
//! * [`run`]: configuration-driven runs, presets and output files.

pub mod acceptance;
pub mod aggregation;
pub mod clearing;
pub mod error;
pub mod network_gen;
pub mod riskmeasure;
pub mod run;
pub mod scenarios;

pub use error::{Error, Result};
