use std::ops::Range;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::bounds::{rank_cdf_bounds, AssumptionKind, TreatmentMarginal};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// The score `p_i` on `n` equal cells of the rank scale `[0, 1]`, subject to
/// `0 <= p_i <= 1`, `(1/n) Σ p_i = p1` and the assumption's constraints with
/// endpoints rounded to the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedProblem {
    pub kind: AssumptionKind,
    pub n: usize,
    pub p1: f64,
    pub a: f64,
    pub b: f64,
    ka: usize,
    kb: usize,
}

/// Cells with a fixed total mass.
struct Block {
    ranges: Vec<Range<usize>>,
    mass: f64,
}

impl DiscretizedProblem {
    pub fn new(kind: AssumptionKind, n: usize, p1: f64, a: f64, b: f64) -> Result<Self> {
        TreatmentMarginal::new(p1)?;
        if n == 0 {
            return Err(Error::domain("grid size must be positive"));
        }
        let (a, b) = match kind {
            AssumptionKind::Full => (0.0, 1.0),
            AssumptionKind::None => (0.0, 0.0),
            _ => (a, b),
        };
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::domain(format!("rank interval [{a}, {b}] must satisfy 0 <= a <= b <= 1")));
        }
        let cell = |t: f64| ((t * n as f64).round() as usize).min(n);
        Ok(DiscretizedProblem {
            kind,
            n,
            p1,
            a,
            b,
            ka: cell(a),
            kb: cell(b),
        })
    }

    /// Cells pinned to `p1`, and blocks whose cells are free up to their
    /// total mass.
    #[allow(clippy::single_range_in_vec_init)]
    fn structure(&self) -> (Range<usize>, Vec<Block>) {
        let (n, p1, ka, kb) = (self.n, self.p1, self.ka, self.kb);
        let mass = |len: usize| p1 * len as f64;
        match self.kind {
            AssumptionKind::Full => (0..n, Vec::new()),
            AssumptionKind::None => (0..0, vec![Block { ranges: vec![0..n], mass: mass(n) }]),
            AssumptionKind::T => (
                ka..kb,
                vec![
                    Block { ranges: vec![0..ka], mass: mass(ka) },
                    Block { ranges: vec![kb..n], mass: mass(n - kb) },
                ],
            ),
            AssumptionKind::U => (
                ka..kb,
                vec![Block {
                    ranges: vec![0..ka, kb..n],
                    mass: mass(ka + n - kb),
                }],
            ),
        }
    }

    /// Linear equalities `Σ_{i ∈ range} p_i = rhs`, including the marginal.
    /// For T-independence these are the average-value constraints between
    /// consecutive grid endpoints of `{0} ∪ [a, b] ∪ {1}`, which imply those
    /// for every pair.
    pub fn equalities(&self) -> Vec<(Range<usize>, f64)> {
        let (n, p1, ka, kb) = (self.n, self.p1, self.ka, self.kb);
        let mut eqs = vec![(0..n, p1 * n as f64)];
        match self.kind {
            AssumptionKind::None => {}
            AssumptionKind::Full => eqs.extend((0..n).map(|i| (i..i + 1, p1))),
            AssumptionKind::U => eqs.extend((ka..kb).map(|i| (i..i + 1, p1))),
            AssumptionKind::T => {
                let mut ends = vec![0];
                ends.extend(ka..=kb);
                ends.push(n);
                ends.dedup();
                for w in ends.windows(2) {
                    if w[1] > w[0] {
                        eqs.push((w[0]..w[1], p1 * (w[1] - w[0]) as f64));
                    }
                }
            }
        }
        eqs
    }

    fn prefix(&self, u: f64) -> usize {
        ((u.clamp(0.0, 1.0) * self.n as f64).round() as usize).min(self.n)
    }
}

fn overlap(r: &Range<usize>, k: usize) -> usize {
    k.clamp(r.start, r.end) - r.start
}

/// Extremes of `F_{R|X}(u | 1) = (1 / (n p1)) Σ_{i < un} p_i` over the
/// feasible scores. Within each block, mass is pushed into (or out of) the
/// prefix as far as the box constraints allow, which is optimal because the
/// objective and the block constraints have 0/1 coefficients.
pub fn lp_extremal_cdf(prob: &DiscretizedProblem, u: f64, sense: Sense) -> f64 {
    let k = prob.prefix(u);
    let (fixed, blocks) = prob.structure();
    let mut acc = prob.p1 * overlap(&fixed, k) as f64;
    for block in &blocks {
        let size: usize = block.ranges.iter().map(|r| r.len()).sum();
        let inside: usize = block.ranges.iter().map(|r| overlap(r, k)).sum();
        acc += match sense {
            Sense::Max => block.mass.min(inside as f64),
            Sense::Min => (block.mass - (size - inside) as f64).max(0.0),
        };
    }
    acc / (prob.n as f64 * prob.p1)
}

/// The same extremum from a simplex solve of the full constraint system.
pub fn lp_extremal_cdf_simplex(prob: &DiscretizedProblem, u: f64, sense: Sense) -> Result<f64> {
    let k = prob.prefix(u);
    let dir = match sense {
        Sense::Min => OptimizationDirection::Minimize,
        Sense::Max => OptimizationDirection::Maximize,
    };
    let mut lp = Problem::new(dir);
    let vars: Vec<_> = (0..prob.n).map(|i| lp.add_var(if i < k { 1.0 } else { 0.0 }, (0.0, 1.0))).collect();
    for (range, rhs) in prob.equalities() {
        lp.add_constraint(range.map(|i| (vars[i], 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, rhs);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    Ok(sol.objective() / (prob.n as f64 * prob.p1))
}

/// `max_u |LP extremum - analytic bound|` over both senses.
pub fn max_gap_vs_analytic(prob: &DiscretizedProblem, u_grid: &[f64]) -> f64 {
    u_grid
        .iter()
        .map(|&u| {
            let (lo, up) = rank_cdf_bounds(prob.kind, prob.p1, prob.a, prob.b, u);
            let gl = (lp_extremal_cdf(prob, u, Sense::Min) - lo).abs();
            let gu = (lp_extremal_cdf(prob, u, Sense::Max) - up).abs();
            gl.max(gu)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_independence_pins_the_cdf() {
        let p = DiscretizedProblem::new(AssumptionKind::Full, 100, 0.3, 0.0, 1.0).unwrap();
        for u in [0.0, 0.13, 0.5, 1.0] {
            assert!((lp_extremal_cdf(&p, u, Sense::Min) - u).abs() <= 0.01);
            assert!((lp_extremal_cdf(&p, u, Sense::Max) - u).abs() <= 0.01);
        }
    }

    #[test]
    fn matches_worked_examples() {
        let t = DiscretizedProblem::new(AssumptionKind::T, 200, 0.5, 0.25, 0.75).unwrap();
        assert!((lp_extremal_cdf(&t, 0.1, Sense::Max) - 0.2).abs() <= 0.01);
        let u = DiscretizedProblem::new(AssumptionKind::U, 200, 0.5, 0.25, 0.75).unwrap();
        assert!((lp_extremal_cdf(&u, 0.5, Sense::Min) - 0.25).abs() <= 0.01);
    }

    #[test]
    fn simplex_agrees_with_greedy() {
        for kind in [AssumptionKind::T, AssumptionKind::U, AssumptionKind::None] {
            let p = DiscretizedProblem::new(kind, 40, 0.35, 0.2, 0.7).unwrap();
            for u in [0.05, 0.3, 0.5, 0.9] {
                for s in [Sense::Min, Sense::Max] {
                    let g = lp_extremal_cdf(&p, u, s);
                    let x = lp_extremal_cdf_simplex(&p, u, s).unwrap();
                    assert!((g - x).abs() < 1e-9, "{kind:?} {u} {s:?}: {g} vs {x}");
                }
            }
        }
    }
}
