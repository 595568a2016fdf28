use serde::Serialize;

use super::score::{AffinePiece, PropensityScore};
use crate::dist::Cdf;
use crate::{Error, Result};

/// Default tolerance for checkers fed analytic inputs.
pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

/// Interior refinement used to test flatness on an interval T.
pub const DEFAULT_REFINEMENT: usize = 101;

// Intervals with less mass than this carry no average-value information.
const ZERO_MASS: f64 = 1e-14;

/// The set T of outcome values at which cdf independence is imposed.
#[derive(Debug, Clone, PartialEq)]
pub enum TSet {
    /// Finitely many isolated points.
    Points(Vec<f64>),
    /// A closed interval, checked on `refinement` equispaced points.
    Interval { lo: f64, hi: f64, refinement: usize },
}

impl TSet {
    pub fn point(t: f64) -> Self {
        TSet::Points(vec![t])
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        TSet::Interval {
            lo,
            hi,
            refinement: DEFAULT_REFINEMENT,
        }
    }

    fn label(&self) -> String {
        match self {
            TSet::Points(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                format!("T-independence on {{{}}}", parts.join(", "))
            }
            TSet::Interval { lo, hi, .. } => format!("T-independence on [{lo}, {hi}]"),
        }
    }

    /// Endpoint candidates `T ∪ {lower, upper}`, sorted and deduplicated.
    fn endpoints(&self, support: (f64, f64)) -> Result<Vec<f64>> {
        let (lo, hi) = support;
        let inside = |t: f64| t >= lo && t <= hi;
        let mut pts = vec![lo, hi];
        match self {
            TSet::Points(ts) => {
                for &t in ts {
                    if !inside(t) {
                        return Err(Error::domain(format!("T point {t} is outside the support [{lo}, {hi}]")));
                    }
                    pts.push(t);
                }
            }
            TSet::Interval { lo: a, hi: b, refinement } => {
                if !(a <= b) || !inside(*a) || !inside(*b) || a.is_infinite() || b.is_infinite() {
                    return Err(Error::domain(format!("T interval [{a}, {b}] is not inside the support")));
                }
                let m = (*refinement).max(2);
                for i in 0..m {
                    pts.push(a + (b - a) * i as f64 / (m - 1) as f64);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The checked condition is not defined for this input.
    Undefined,
}

/// Outcome of an exogeneity check on a latent propensity score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub assumption: String,
    pub verdict: Verdict,
    /// Interval with the largest average-value gap, if any was checked.
    pub worst_interval: Option<(f64, f64)>,
    pub max_gap: f64,
    /// `P(X = 1) = ∫ p dF`.
    pub treatment_share: f64,
    /// Endpoint pairs skipped because their interval has zero mass.
    pub skipped_zero_mass: usize,
    /// For multivalued treatments: the thresholds x whose indicator
    /// reduction `1(X > x)` failed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failing_x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn ensure_covers(p: &PropensityScore, dist: &Cdf) -> Result<()> {
    let (pl, ph) = p.domain();
    let (dl, dh) = dist.support();
    if pl > dl || ph < dh {
        return Err(Error::domain(format!(
            "score domain [{pl}, {ph}] does not cover the outcome support [{dl}, {dh}]"
        )));
    }
    Ok(())
}

/// `P(X = 1) = ∫ p(y) dF(y)`, computed piece by piece in closed form.
pub fn treatment_share(p: &PropensityScore, dist: &Cdf) -> Result<f64> {
    ensure_covers(p, dist)?;
    Ok(p.integrate(dist, f64::NEG_INFINITY, f64::INFINITY))
}

/// Average-value check: `E(p(Y) | Y ∈ (t1, t2)) = P(X = 1)` for every pair of
/// endpoints in `T ∪ {lower, upper}`.
pub fn check_t_independence(p: &PropensityScore, dist: &Cdf, t: &TSet, tol: f64) -> Result<IndependenceReport> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let share = treatment_share(p, dist)?;
    let pts = t.endpoints(dist.support())?;
    // cumulative mass and cumulative ∫ p dF at each endpoint
    let mass: Vec<f64> = pts.iter().map(|&y| dist.partial_moment(0, f64::NEG_INFINITY, y)).collect();
    let acc: Vec<f64> = pts.iter().map(|&y| p.integrate(dist, f64::NEG_INFINITY, y)).collect();
    let n = pts.len();
    let (mut worst, mut max_gap, mut skipped) = (None, 0.0_f64, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let m = if j + 1 == n { 1.0 - mass[i] } else { mass[j] - mass[i] };
            if m <= ZERO_MASS {
                skipped += 1;
                continue;
            }
            let total = if j + 1 == n { share - acc[i] } else { acc[j] - acc[i] };
            let gap = (total / m - share).abs();
            if worst.is_none() || gap > max_gap {
                max_gap = gap;
                worst = Some((pts[i], pts[j]));
            }
        }
    }
    Ok(IndependenceReport {
        assumption: t.label(),
        verdict: if max_gap <= tol { Verdict::Pass } else { Verdict::Fail },
        worst_interval: worst,
        max_gap,
        treatment_share: share,
        skipped_zero_mass: skipped,
        failing_x: Vec::new(),
        note: (skipped > 0).then(|| format!("{skipped} zero-mass interval(s) skipped")),
    })
}

/// U-independence: `p(y) = P(X = 1)` for almost every `y` in `[lo, hi]`.
pub fn check_u_independence(p: &PropensityScore, dist: &Cdf, lo: f64, hi: f64, tol: f64) -> Result<IndependenceReport> {
    if !(lo <= hi) {
        return Err(Error::domain(format!("U interval [{lo}, {hi}] is empty")));
    }
    let share = treatment_share(p, dist)?;
    let (mut worst, mut max_gap) = (None, 0.0_f64);
    for piece in p.pieces() {
        let (l, h) = (piece.lo.max(lo), piece.hi.min(hi));
        if !(h > l) || dist.partial_moment(0, l, h) <= ZERO_MASS {
            continue;
        }
        let gap = (piece.value_at(l) - share).abs().max((piece.value_at(h) - share).abs());
        if worst.is_none() || gap > max_gap {
            max_gap = gap;
            worst = Some((l, h));
        }
    }
    let note = (dist.partial_moment(0, lo, hi) <= ZERO_MASS)
        .then(|| "U has zero probability; the restriction is vacuous".to_string());
    Ok(IndependenceReport {
        assumption: format!("U-independence on [{lo}, {hi}]"),
        verdict: if max_gap <= tol { Verdict::Pass } else { Verdict::Fail },
        worst_interval: worst,
        max_gap,
        treatment_share: share,
        skipped_zero_mass: 0,
        failing_x: Vec::new(),
        note,
    })
}

/// Mean independence: `E[(Y / E Y)·p(Y)] = P(X = 1)`. Undefined when
/// `E Y = 0`; shift the outcome and re-check.
pub fn check_mean_independence(p: &PropensityScore, dist: &Cdf, tol: f64) -> Result<IndependenceReport> {
    let share = treatment_share(p, dist)?;
    let mean = dist.mean();
    let support = dist.support();
    let mut report = IndependenceReport {
        assumption: "mean independence".to_string(),
        verdict: Verdict::Undefined,
        worst_interval: Some(support),
        max_gap: f64::NAN,
        treatment_share: share,
        skipped_zero_mass: 0,
        failing_x: Vec::new(),
        note: None,
    };
    if !mean.is_finite() {
        report.note = Some("outcome mean is not finite".into());
        return Ok(report);
    }
    if mean.abs() < 1e-12 {
        report.note = Some("undefined: E(Y) = 0, renormalize the outcome".into());
        return Ok(report);
    }
    let weighted = p.integrate_weighted(dist, f64::NEG_INFINITY, f64::INFINITY) / mean;
    let gap = (weighted - share).abs();
    report.max_gap = gap;
    report.verdict = if gap <= tol { Verdict::Pass } else { Verdict::Fail };
    report.note = Some(format!("weighted average {weighted}"));
    Ok(report)
}

const DIRECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Run {
    sign: i8,
    // A run can be shared by two consecutive non-monotone intervals unless it
    // is a single jump.
    splittable: bool,
}

/// Maximal runs of strictly increasing / decreasing behaviour, jumps
/// included. Jumps below tolerance are removable and ignored.
fn direction_runs(p: &PropensityScore) -> Vec<Run> {
    let mut events: Vec<(i8, bool)> = Vec::new();
    let pieces = p.pieces();
    for (i, piece) in pieces.iter().enumerate() {
        if i > 0 {
            let jump = piece.left_value() - pieces[i - 1].right_value();
            if jump.abs() > DIRECTION_TOL {
                events.push((jump.signum() as i8, false));
            }
        }
        let rise = if piece.lo.is_finite() && piece.hi.is_finite() {
            piece.slope * (piece.hi - piece.lo)
        } else {
            0.0
        };
        if rise.abs() > DIRECTION_TOL {
            events.push((rise.signum() as i8, true));
        }
    }
    let mut runs: Vec<(i8, usize, bool)> = Vec::new();
    for (sign, continuous) in events {
        match runs.last_mut() {
            Some(last) if last.0 == sign => {
                last.1 += 1;
                last.2 |= continuous;
            }
            _ => runs.push((sign, 1, continuous)),
        }
    }
    runs.into_iter()
        .map(|(sign, count, continuous)| Run {
            sign,
            splittable: continuous || count > 1,
        })
        .collect()
}

/// The largest K such that the domain splits into K intervals on each of
/// which `p` is not monotone.
pub fn count_direction_changes(p: &PropensityScore) -> usize {
    let runs = direction_runs(p);
    let mut available = vec![true; runs.len()];
    let mut k = 0;
    for j in 0..runs.len().saturating_sub(1) {
        if available[j] {
            debug_assert_ne!(runs[j].sign, runs[j + 1].sign);
            k += 1;
            available[j + 1] = runs[j + 1].splittable;
        }
    }
    k
}

/// True iff `p` is weakly monotone and not constant.
pub fn is_monotone_nonconstant(p: &PropensityScore) -> bool {
    direction_runs(p).len() == 1
}

/// A score satisfying T-independence for every T disjoint from `(a, b)` that
/// equals 1 on `[a, c)` and 0 on `[c, b)`, with `c` chosen to keep the
/// average over `(a, b)` at `share`, and `share` elsewhere.
pub fn construct_extreme_propensity(dist: &Cdf, gap: (f64, f64), share: f64) -> Result<PropensityScore> {
    let (a, b) = gap;
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::Overlap(share));
    }
    let (lo, hi) = dist.support();
    if !(a < b && a >= lo && b <= hi) {
        return Err(Error::domain(format!("gap [{a}, {b}] must be a nonempty interval inside the support")));
    }
    let (fa, fb) = (dist.evaluate(a), dist.evaluate(b));
    if fb - fa <= ZERO_MASS {
        return Err(Error::domain(format!("gap [{a}, {b}] has zero probability")));
    }
    let c = dist.quantile_clamped(fa + share * (fb - fa)).clamp(a, b);
    let mut pieces = Vec::new();
    if a > lo {
        pieces.push(AffinePiece::constant(lo, a, share));
    }
    if c > a {
        pieces.push(AffinePiece::constant(a, c, 1.0));
    }
    if b > c {
        pieces.push(AffinePiece::constant(c, b, 0.0));
    }
    if hi > b {
        pieces.push(AffinePiece::constant(b, hi, share));
    }
    PropensityScore::new(pieces)
}

/// Conditional cdf of the outcome in one treatment arm,
/// `F(y | x) = ∫_{-∞}^y P(X = x | Y = v) / p_x dF(v)`.
#[derive(Debug, Clone)]
pub struct InducedCdf {
    score: PropensityScore,
    dist: Cdf,
    arm_share: f64,
}

impl InducedCdf {
    pub fn new(p: &PropensityScore, dist: &Cdf, arm: u8) -> Result<Self> {
        let share = treatment_share(p, dist)?;
        let (score, arm_share) = match arm {
            1 => (p.clone(), share),
            0 => (p.complement(), 1.0 - share),
            _ => return Err(Error::domain(format!("treatment arm {arm} is not 0 or 1"))),
        };
        if arm_share <= 0.0 {
            return Err(Error::Overlap(share));
        }
        Ok(InducedCdf {
            score,
            dist: dist.clone(),
            arm_share,
        })
    }

    pub fn arm_share(&self) -> f64 {
        self.arm_share
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        let v = self.score.integrate(&self.dist, f64::NEG_INFINITY, y) + self.atom_at(y);
        (v / self.arm_share).clamp(0.0, 1.0)
    }

    // Mass at y itself (nonzero only for empirical cdfs).
    fn atom_at(&self, y: f64) -> f64 {
        if self.dist.is_continuous() {
            0.0
        } else {
            let next = f64::from_bits(y.to_bits() + 1);
            self.score.integrate(&self.dist, y, next)
        }
    }

    /// Conditional mean `E(Y | X = x)`.
    pub fn mean(&self) -> f64 {
        self.score.integrate_weighted(&self.dist, f64::NEG_INFINITY, f64::INFINITY) / self.arm_share
    }

    /// Left-inverse by bisection on the support.
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::domain(format!("probability {tau} is outside [0, 1]")));
        }
        let (mut lo, mut hi) = self.dist.support();
        if lo.is_infinite() {
            lo = self.dist.quantile(1e-15)?;
        }
        if hi.is_infinite() {
            hi = self.dist.quantile(1.0 - 1e-15)?;
        }
        if self.evaluate(lo) >= tau {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.evaluate(mid) >= tau {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
