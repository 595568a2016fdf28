//! Multivalued and continuous treatments, handled through the indicator
//! reductions `1(X > x)`.

use super::checks::{check_t_independence, IndependenceReport, TSet, Verdict};
use super::score::PropensityScore;
use crate::dist::Cdf;
use crate::{Error, Result};

/// Conditional survival functions `P(X > x | U = u)` on a common
/// `(u, x)` grid; `survival[i][j]` is the value at `u_grid[i]`, `x_grid[j]`.
#[derive(Debug, Clone)]
pub struct ConditionalFamily {
    u_grid: Vec<f64>,
    x_grid: Vec<f64>,
    survival: Vec<Vec<f64>>,
}

impl ConditionalFamily {
    pub fn new(u_grid: Vec<f64>, x_grid: Vec<f64>, survival: Vec<Vec<f64>>) -> Result<Self> {
        if u_grid.is_empty() || x_grid.is_empty() {
            return Err(Error::InconsistentGrid("u and x grids must be nonempty".into()));
        }
        if u_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InconsistentGrid("u grid is not strictly increasing".into()));
        }
        if survival.len() != u_grid.len() {
            return Err(Error::InconsistentGrid(format!(
                "{} conditional distributions for {} u values",
                survival.len(),
                u_grid.len()
            )));
        }
        if let Some((i, row)) = survival.iter().enumerate().find(|(_, r)| r.len() != x_grid.len()) {
            return Err(Error::InconsistentGrid(format!(
                "conditional at u = {} has {} x values, expected {}",
                u_grid[i],
                row.len(),
                x_grid.len()
            )));
        }
        Ok(ConditionalFamily {
            u_grid,
            x_grid,
            survival,
        })
    }

    /// Builds the family from the conditional cdfs `X | U = u`.
    pub fn from_cdfs(u_grid: Vec<f64>, x_grid: Vec<f64>, cdfs: &[Cdf]) -> Result<Self> {
        let survival = cdfs
            .iter()
            .map(|c| x_grid.iter().map(|&x| 1.0 - c.evaluate(x)).collect())
            .collect();
        Self::new(u_grid, x_grid, survival)
    }

    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }
}

/// Whether X is positively or negatively regression dependent on U:
/// `P(X > x | U = u)` moves in one weak direction in u, for every x.
pub fn check_regression_dependence(family: &ConditionalFamily) -> bool {
    const TOL: f64 = 1e-12;
    let rows = &family.survival;
    let monotone = |up: bool| {
        rows.windows(2).all(|w| {
            w[0].iter().zip(&w[1]).all(|(a, b)| if up { *b >= a - TOL } else { *b <= a + TOL })
        })
    };
    monotone(true) || monotone(false)
}

/// T-independence of U from a multivalued X: every indicator reduction
/// `u ↦ P(X > x | U = u)` must pass the binary average-value check.
pub fn check_t_independence_general_x<F>(
    conditional_survival: F,
    x_grid: &[f64],
    dist_u: &Cdf,
    t: &TSet,
    tol: f64,
) -> Result<IndependenceReport>
where
    F: Fn(f64) -> Result<PropensityScore>,
{
    if x_grid.is_empty() {
        return Err(Error::domain("x grid is empty"));
    }
    let mut reports = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let score = conditional_survival(x)?;
        reports.push((x, check_t_independence(&score, dist_u, t, tol)?));
    }
    let failing_x: Vec<f64> = reports.iter().filter(|(_, r)| !r.passed()).map(|(x, _)| *x).collect();
    let (worst_x, worst) = reports
        .iter()
        .max_by(|a, b| a.1.max_gap.total_cmp(&b.1.max_gap))
        .expect("nonempty grid");
    let mut out = worst.clone();
    out.assumption = format!("{} for all indicators 1(X > x)", worst.assumption);
    out.verdict = if failing_x.is_empty() { Verdict::Pass } else { Verdict::Fail };
    out.note = Some(format!("largest gap at x = {worst_x}"));
    out.failing_x = failing_x;
    Ok(out)
}
