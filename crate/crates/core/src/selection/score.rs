use serde::{Deserialize, Serialize};

use crate::dist::Cdf;
use crate::{Error, Result};

const VALUE_TOL: f64 = 1e-12;

/// One affine piece `slope * y + intercept` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        AffinePiece {
            lo,
            hi,
            slope: 0.0,
            intercept: value,
        }
    }

    /// The affine function through `(x0, v0)` and `(x1, v1)`.
    pub fn through(x0: f64, v0: f64, x1: f64, v1: f64) -> Self {
        let slope = (v1 - v0) / (x1 - x0);
        AffinePiece {
            lo: x0,
            hi: x1,
            slope,
            intercept: v0 - slope * x0,
        }
    }

    pub fn value_at(&self, y: f64) -> f64 {
        if self.slope == 0.0 {
            self.intercept
        } else {
            self.slope * y + self.intercept
        }
    }

    /// Limit at the left end of the piece.
    pub fn left_value(&self) -> f64 {
        self.value_at(self.lo)
    }

    /// Limit at the right end of the piece.
    pub fn right_value(&self) -> f64 {
        self.value_at(self.hi)
    }

    /// `∫_[lo ∩ a, hi ∩ b) (slope·y + intercept) dF(y)`.
    pub(crate) fn integrate(&self, dist: &Cdf, lo: f64, hi: f64) -> f64 {
        let (l, h) = (lo.max(self.lo), hi.min(self.hi));
        if !(h > l) {
            return 0.0;
        }
        let mut acc = self.intercept * dist.partial_moment(0, l, h);
        if self.slope != 0.0 {
            acc += self.slope * dist.partial_moment(1, l, h);
        }
        acc
    }

    /// `∫ y·(slope·y + intercept) dF(y)` over the piece.
    pub(crate) fn integrate_weighted(&self, dist: &Cdf, lo: f64, hi: f64) -> f64 {
        let (l, h) = (lo.max(self.lo), hi.min(self.hi));
        if !(h > l) {
            return 0.0;
        }
        let mut acc = self.intercept * dist.partial_moment(1, l, h);
        if self.slope != 0.0 {
            acc += self.slope * dist.partial_moment(2, l, h);
        }
        acc
    }
}

/// A contiguous piecewise-affine function on `[lo, hi]`. Pieces are
/// half-open `[lo, hi)`, except the last, which includes its right end.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("piecewise function needs at least one piece"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.lo.is_nan() || p.hi.is_nan() || !(p.hi > p.lo) {
                return Err(Error::domain(format!("piece {i} has empty interval [{}, {})", p.lo, p.hi)));
            }
            if !p.slope.is_finite() || !p.intercept.is_finite() {
                return Err(Error::domain(format!("piece {i} has non-finite coefficients")));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return Err(Error::domain(format!(
                    "pieces {i} and {} are not contiguous: {} != {}",
                    i + 1,
                    w[0].hi,
                    w[1].lo
                )));
            }
        }
        Ok(PiecewiseAffine { pieces })
    }

    /// Continuous piecewise-linear interpolation of `(y, value)` knots.
    pub fn from_knots(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::domain("interpolation needs at least two knots"));
        }
        let pieces = knots
            .windows(2)
            .map(|w| AffinePiece::through(w[0].0, w[0].1, w[1].0, w[1].1))
            .collect();
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    fn piece_index(&self, y: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if y < lo || y > hi {
            return None;
        }
        let i = self.pieces.partition_point(|p| p.hi <= y);
        Some(i.min(self.pieces.len() - 1))
    }

    /// Value at `y`, or `None` outside the domain.
    pub fn evaluate(&self, y: f64) -> Option<f64> {
        self.piece_index(y).map(|i| self.pieces[i].value_at(y))
    }
}

/// Latent propensity score `p(y) = P(X = 1 | Y_x = y)` as a piecewise-affine
/// function with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropensityScore {
    f: PiecewiseAffine,
}

impl PropensityScore {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        Self::from_function(PiecewiseAffine::new(pieces)?)
    }

    pub fn from_function(f: PiecewiseAffine) -> Result<Self> {
        let mut pieces = f.pieces;
        for (i, p) in pieces.iter_mut().enumerate() {
            if (p.lo.is_infinite() || p.hi.is_infinite()) && p.slope != 0.0 {
                return Err(Error::domain(format!("piece {i} is unbounded but not constant")));
            }
            for v in [p.left_value(), p.right_value()] {
                if !(-VALUE_TOL..=1.0 + VALUE_TOL).contains(&v) {
                    return Err(Error::domain(format!("piece {i} takes value {v} outside [0, 1]")));
                }
            }
            // snap round-off at the box edges
            if p.slope == 0.0 {
                p.intercept = p.intercept.clamp(0.0, 1.0);
            }
        }
        Ok(PropensityScore {
            f: PiecewiseAffine { pieces },
        })
    }

    pub fn constant(value: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![AffinePiece::constant(lo, hi, value)])
    }

    /// Step function from `(lo, hi, value)` triples; zero-length steps are
    /// dropped.
    pub fn from_steps(steps: &[(f64, f64, f64)]) -> Result<Self> {
        let pieces: Vec<AffinePiece> = steps
            .iter()
            .filter(|(lo, hi, _)| hi > lo)
            .map(|&(lo, hi, v)| AffinePiece::constant(lo, hi, v))
            .collect();
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        self.f.pieces()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.f.domain()
    }

    pub fn as_function(&self) -> &PiecewiseAffine {
        &self.f
    }

    /// `p(y)`, clamped into `[0, 1]`; `None` outside the domain.
    pub fn evaluate(&self, y: f64) -> Option<f64> {
        self.f.evaluate(y).map(|v| v.clamp(0.0, 1.0))
    }

    /// `1 - p`, the score for the other arm.
    pub fn complement(&self) -> PropensityScore {
        let pieces = self
            .pieces()
            .iter()
            .map(|p| AffinePiece {
                lo: p.lo,
                hi: p.hi,
                slope: -p.slope,
                intercept: 1.0 - p.intercept,
            })
            .collect();
        PropensityScore {
            f: PiecewiseAffine { pieces },
        }
    }

    /// `∫_[lo, hi) p dF`. The last piece is closed on the right, so an atom
    /// at the upper domain end is counted.
    pub(crate) fn integrate(&self, dist: &Cdf, lo: f64, hi: f64) -> f64 {
        self.fold(lo, hi, |p, l, h| p.integrate(dist, l, h))
    }

    /// `∫_[lo, hi) y·p(y) dF`.
    pub(crate) fn integrate_weighted(&self, dist: &Cdf, lo: f64, hi: f64) -> f64 {
        self.fold(lo, hi, |p, l, h| p.integrate_weighted(dist, l, h))
    }

    fn fold(&self, lo: f64, hi: f64, f: impl Fn(&AffinePiece, f64, f64) -> f64) -> f64 {
        let n = self.pieces().len();
        self.pieces()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut q = *p;
                if i + 1 == n {
                    q.hi = f64::INFINITY;
                }
                f(&q, lo, hi)
            })
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let wire: Vec<WirePiece> = self.pieces().iter().map(WirePiece::from).collect();
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: Vec<WirePiece> = serde_json::from_str(s)?;
        Self::new(wire.into_iter().map(AffinePiece::from).collect())
    }
}

/// JSON piece: `{"lo":0.0,"hi":0.5,"slope":2.0,"intercept":0.0}`. A `null`
/// end means unbounded in that direction.
#[derive(Debug, Serialize, Deserialize)]
struct WirePiece {
    lo: Option<f64>,
    hi: Option<f64>,
    slope: f64,
    intercept: f64,
}

impl From<&AffinePiece> for WirePiece {
    fn from(p: &AffinePiece) -> Self {
        WirePiece {
            lo: p.lo.is_finite().then_some(p.lo),
            hi: p.hi.is_finite().then_some(p.hi),
            slope: p.slope,
            intercept: p.intercept,
        }
    }
}

impl From<WirePiece> for AffinePiece {
    fn from(w: WirePiece) -> Self {
        AffinePiece {
            lo: w.lo.unwrap_or(f64::NEG_INFINITY),
            hi: w.hi.unwrap_or(f64::INFINITY),
            slope: w.slope,
            intercept: w.intercept,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_gaps_and_out_of_range_values() {
        let gap = vec![AffinePiece::constant(0.0, 0.4, 0.5), AffinePiece::constant(0.5, 1.0, 0.5)];
        assert!(PropensityScore::new(gap).is_err());
        assert!(PropensityScore::new(vec![AffinePiece::through(0.0, 0.0, 1.0, 1.2)]).is_err());
        let unbounded = AffinePiece {
            lo: 0.0,
            hi: f64::INFINITY,
            slope: 0.1,
            intercept: 0.0,
        };
        assert!(PropensityScore::new(vec![unbounded]).is_err());
    }

    #[test]
    fn half_open_pieces() {
        let p = PropensityScore::from_steps(&[(0.0, 0.5, 0.2), (0.5, 1.0, 0.8)]).unwrap();
        assert_eq!(p.evaluate(0.5), Some(0.8));
        assert_eq!(p.evaluate(1.0), Some(0.8));
        assert_eq!(p.evaluate(0.49), Some(0.2));
        assert_eq!(p.evaluate(1.01), None);
    }

    #[test]
    fn json_uses_null_for_unbounded_ends() {
        let p = PropensityScore::constant(0.3, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let s = p.to_json().unwrap();
        assert!(s.contains("null"));
        assert_eq!(PropensityScore::from_json(&s).unwrap(), p);
    }

    #[test]
    fn json_wire_format() {
        let s = r#"[{"lo":0.0,"hi":0.5,"slope":2.0,"intercept":0.0},
                    {"lo":0.5,"hi":1.0,"slope":2.0,"intercept":-1.0}]"#;
        let p = PropensityScore::from_json(s).unwrap();
        assert_eq!(p.pieces().len(), 2);
        assert!((p.evaluate(0.75).unwrap() - 0.5).abs() < 1e-15);
    }
}
