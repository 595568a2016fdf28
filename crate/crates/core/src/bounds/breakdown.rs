use serde::Serialize;

use crate::{Error, Result};

/// Width of the final bisection bracket.
pub const BREAKDOWN_RESOLUTION: f64 = 1e-6;

const MONOTONE_GRID: usize = 101;
const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakdown {
    pub delta: f64,
    /// The lower bound is already below the threshold at `δ = 0`.
    pub fails_at_point_identification: bool,
}

/// `sup{δ ∈ [0, 0.5] : LB(δ) ≥ threshold}` for a nonincreasing lower-bound
/// curve `LB`, located by bisection.
pub fn breakdown_point<F>(lower_bound: F, threshold: f64) -> Result<Breakdown>
where
    F: Fn(f64) -> Result<f64>,
{
    let eval = |d: f64| -> Result<f64> {
        let v = lower_bound(d)?;
        if v.is_nan() {
            return Err(Error::domain(format!("lower bound is NaN at delta {d}")));
        }
        Ok(v)
    };
    let grid: Vec<f64> = (0..MONOTONE_GRID).map(|i| 0.5 * i as f64 / (MONOTONE_GRID - 1) as f64).collect();
    let values = grid.iter().map(|&d| eval(d)).collect::<Result<Vec<_>>>()?;
    for i in 1..values.len() {
        let (earlier, later) = (values[i - 1], values[i]);
        if later.is_finite() && later > earlier + MONOTONE_TOL * 1.0f64.max(earlier.abs()) {
            return Err(Error::NotMonotone { at: grid[i], earlier, later });
        }
    }
    if values[0] < threshold {
        return Ok(Breakdown {
            delta: 0.0,
            fails_at_point_identification: true,
        });
    }
    if values[values.len() - 1] >= threshold {
        return Ok(Breakdown {
            delta: 0.5,
            fails_at_point_identification: false,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > BREAKDOWN_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Breakdown {
        delta: lo,
        fails_at_point_identification: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let b = breakdown_point(|d| Ok(0.2 - d), 0.0).unwrap();
        assert!((b.delta - 0.2).abs() < 1e-5);
        assert!(!b.fails_at_point_identification);
    }

    #[test]
    fn never_breaks_down() {
        assert_eq!(breakdown_point(|_| Ok(1.0), 0.0).unwrap().delta, 0.5);
    }

    #[test]
    fn fails_at_zero() {
        let b = breakdown_point(|d| Ok(-0.1 - d), 0.0).unwrap();
        assert_eq!(b.delta, 0.0);
        assert!(b.fails_at_point_identification);
    }

    #[test]
    fn increasing_curve_is_rejected() {
        assert!(matches!(breakdown_point(|d| Ok(d - 0.2), 0.0), Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn infinite_tail() {
        let b = breakdown_point(|d| Ok(if d > 0.3 { f64::NEG_INFINITY } else { 1.0 }), 0.0).unwrap();
        assert!((b.delta - 0.3).abs() < 1e-5);
    }
}
