use crate::bounds::{AssumptionKind, TreatmentMarginal};
use crate::selection::PropensityScore;
use crate::{Error, Result};

/// Scores `P(X = x | R = r)` for the arm whose cdf is bounded, and
/// `1 - P(X = x | R = r)` for the other arm, on a uniform rank `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub arm: PropensityScore,
    pub other: PropensityScore,
}

type Steps = Vec<(f64, f64, f64)>;

/// The score whose induced cdf is `ε·lower + (1 - ε)·upper`, the mixture of
/// the sharp cdf bounds for rank interval `[a, b]` and `p_x = P(X = x)`.
pub fn sharpness_witness(kind: AssumptionKind, a: f64, b: f64, p_x: f64, eps: f64) -> Result<Witness> {
    let p = TreatmentMarginal::new(p_x)?.p1();
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::domain(format!("mixing weight {eps} is not in [0, 1]")));
    }
    let (a, b) = match kind {
        AssumptionKind::Full => (0.0, 1.0),
        AssumptionKind::None => (0.0, 0.0),
        _ if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b => (a, b),
        _ => return Err(Error::domain(format!("rank interval [{a}, {b}] must satisfy 0 <= a <= b <= 1"))),
    };
    let (lower, upper) = extreme_steps(kind, p, a, b);
    let mixed = mix(&lower, &upper, eps);
    let arm = PropensityScore::from_steps(&mixed)?;
    Ok(Witness {
        other: arm.complement(),
        arm,
    })
}

fn extreme_steps(kind: AssumptionKind, p: f64, a: f64, b: f64) -> (Steps, Steps) {
    let m = b - a;
    match kind {
        AssumptionKind::Full => (vec![(0.0, 1.0, p)], vec![(0.0, 1.0, p)]),
        AssumptionKind::None => (vec![(0.0, 1.0 - p, 0.0), (1.0 - p, 1.0, 1.0)], vec![(0.0, p, 1.0), (p, 1.0, 0.0)]),
        AssumptionKind::T => (
            vec![
                (0.0, (1.0 - p) * a, 0.0),
                ((1.0 - p) * a, a, 1.0),
                (a, b, p),
                (b, p * b + 1.0 - p, 0.0),
                (p * b + 1.0 - p, 1.0, 1.0),
            ],
            vec![
                (0.0, p * a, 1.0),
                (p * a, a, 0.0),
                (a, b, p),
                (b, p + b * (1.0 - p), 1.0),
                (p + b * (1.0 - p), 1.0, 0.0),
            ],
        ),
        AssumptionKind::U => {
            let lower = if (1.0 - m) * (1.0 - p) <= a {
                let c = (1.0 - m) * (1.0 - p);
                vec![(0.0, c, 0.0), (c, a, 1.0), (a, b, p), (b, 1.0, 1.0)]
            } else {
                let c = p * m + 1.0 - p;
                vec![(0.0, a, 0.0), (a, b, p), (b, c, 0.0), (c, 1.0, 1.0)]
            };
            let upper = if (1.0 - m) * p <= a {
                let c = (1.0 - m) * p;
                vec![(0.0, c, 1.0), (c, a, 0.0), (a, b, p), (b, 1.0, 0.0)]
            } else {
                let c = m * (1.0 - p) + p;
                vec![(0.0, a, 1.0), (a, b, p), (b, c, 1.0), (c, 1.0, 0.0)]
            };
            (lower, upper)
        }
    }
}

/// `ε·lower + (1 - ε)·upper` on the common refinement of both step grids.
fn mix(lower: &Steps, upper: &Steps, eps: f64) -> Steps {
    let mut cuts: Vec<f64> = lower.iter().chain(upper).flat_map(|&(lo, hi, _)| [lo, hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let value = |steps: &Steps, x: f64| {
        steps
            .iter()
            .find(|&&(lo, hi, _)| lo <= x && x < hi)
            .map_or(0.0, |s| s.2)
    };
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[0], w[1], eps * value(lower, mid) + (1.0 - eps) * value(upper, mid))
        })
        .collect()
}
