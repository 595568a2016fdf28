//! Independent checks of the closed-form bounds: brute-force linear programs
//! over discretized scores, explicit scores attaining the bounds, and a
//! simulator for `(Y, X)` given a latent propensity score.

mod lp;
mod simulate;
mod witness;

pub use lp::{lp_extremal_cdf, lp_extremal_cdf_simplex, max_gap_vs_analytic, DiscretizedProblem, Sense};
pub use simulate::{simulate_joint, synthetic_panel, Simulation};
pub use witness::{sharpness_witness, Witness};
