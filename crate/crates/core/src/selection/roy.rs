use super::score::{AffinePiece, PiecewiseAffine, PropensityScore};
use crate::dist::{norm_cdf, Cdf};
use crate::{Error, Result};

/// Knots used to tabulate `Φ∘μ` on each affine piece of `μ`.
pub const ROY_KNOTS_PER_PIECE: usize = 1001;

// Beyond |μ| = 8.5, Φ(μ) is within 1e-17 of 0 or 1.
const SATURATION: f64 = 8.5;

/// Roy model with `Y1 = Y0 + μ(Y0) - ε`, `ε ~ N(0, 1)` independent of `Y0`,
/// and treatment `X = 1(Y1 > Y0)`.
#[derive(Debug, Clone)]
pub struct RoyModel {
    pub mu: PiecewiseAffine,
    pub baseline: Cdf,
}

impl RoyModel {
    pub fn new(mu: PiecewiseAffine, baseline: Cdf) -> Result<Self> {
        let (ml, mh) = mu.domain();
        let (bl, bh) = baseline.support();
        if ml > bl || mh < bh {
            return Err(Error::domain(format!(
                "mu is defined on [{ml}, {mh}] but the baseline support is [{bl}, {bh}]"
            )));
        }
        Ok(RoyModel { mu, baseline })
    }
}

/// `p(y0) = Φ(μ(y0))`, tabulated as a piecewise-linear score.
pub fn roy_propensity(model: &RoyModel) -> Result<PropensityScore> {
    let (bl, bh) = model.baseline.support();
    let mut pieces: Vec<AffinePiece> = Vec::new();
    for m in model.mu.pieces() {
        let (lo, hi) = (m.lo.max(bl), m.hi.min(bh));
        if !(hi > lo) {
            continue;
        }
        if m.slope == 0.0 {
            pieces.push(AffinePiece::constant(lo, hi, norm_cdf(m.intercept)));
            continue;
        }
        // restrict the tabulation to where Φ∘μ is not saturated
        let y_at = |v: f64| (v - m.intercept) / m.slope;
        let (e0, e1) = {
            let (u, v) = (y_at(-SATURATION), y_at(SATURATION));
            (u.min(v), u.max(v))
        };
        let (tl, th) = (lo.max(e0), hi.min(e1));
        if !(th > tl) {
            // saturated throughout; use the value at a finite point of the piece
            let y = if lo.is_finite() { lo } else { hi };
            pieces.push(AffinePiece::constant(lo, hi, norm_cdf(m.value_at(y)).round()));
            continue;
        }
        if tl > lo {
            pieces.push(AffinePiece::constant(lo, tl, norm_cdf(m.value_at(tl))));
        }
        let n = ROY_KNOTS_PER_PIECE - 1;
        let knots: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let y = if i == n { th } else { tl + (th - tl) * i as f64 / n as f64 };
                (y, norm_cdf(m.value_at(y)))
            })
            .collect();
        pieces.extend(PiecewiseAffine::from_knots(&knots)?.pieces().iter().copied());
        if hi > th {
            pieces.push(AffinePiece::constant(th, hi, norm_cdf(m.value_at(th))));
        }
    }
    PropensityScore::new(pieces)
}
