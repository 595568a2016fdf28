//! Latent propensity scores and the exogeneity assumptions they satisfy.
//!
//! With a binary treatment, the dependence between a potential outcome `Y_x`
//! and `X` is fully described by `p(y) = P(X = 1 | Y_x = y)`. Cdf
//! independence on a set T holds iff the average of `p` over every interval
//! with endpoints in `T ∪ {lower, upper}` equals `P(X = 1)`; mean independence
//! constrains a single `y`-weighted average; U-independence forces `p` to be
//! flat on an interval. This module represents `p` as a piecewise-affine
//! function so that all of these integrals are exact.

mod checks;
mod general;
mod roy;
mod score;

pub use checks::{
    check_mean_independence, check_t_independence, check_u_independence, construct_extreme_propensity,
    count_direction_changes, is_monotone_nonconstant, treatment_share, IndependenceReport, InducedCdf, TSet,
    Verdict, DEFAULT_CHECK_TOL, DEFAULT_REFINEMENT,
};
pub use general::{check_regression_dependence, check_t_independence_general_x, ConditionalFamily};
pub use roy::{roy_propensity, RoyModel, ROY_KNOTS_PER_PIECE};
pub use score::{AffinePiece, PiecewiseAffine, PropensityScore};

/// The sawtooth score `2u` on `[0, 1/2)`, `2u - 1` on `[1/2, 1]`: median
/// independent of a uniform outcome, but not mean independent.
pub fn sawtooth() -> PropensityScore {
    PropensityScore::new(vec![
        AffinePiece::through(0.0, 0.0, 0.5, 1.0),
        AffinePiece::through(0.5, 0.0, 1.0, 1.0),
    ])
    .expect("valid sawtooth")
}
