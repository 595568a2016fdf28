//! Exogeneity assumptions as restrictions on latent selection.
//!
//! The crate has two halves. The `selection` module classifies latent
//! propensity scores `p(y) = P(X = 1 | Y_x = y)` by which exogeneity
//! assumptions they satisfy (quantile/T-independence, U-independence, mean
//! independence, regression dependence). The `bounds` module computes sharp
//! identified sets for conditional cdfs, quantiles, means, ATT and QTT under
//! T- and U-independence, plus breakdown points of sensitivity curves.
//!
//! `oracle` re-derives the cdf bounds by brute-force linear programming and
//! builds explicit joint distributions attaining them; `estimate` runs the
//! plug-in pipeline on covariate cells of a dataset.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
mod error;
pub mod estimate;
pub mod oracle;
pub mod selection;

pub use error::{Error, Result};

/// Absolute tolerance used for probability comparisons.
pub const PROB_TOL: f64 = 1e-10;
