use super::{AssumptionKind, AssumptionSpec, BoundInterval, TreatmentMarginal};
use crate::dist::Cdf;
use crate::{Error, Result};

/// Bounds on `Q_{Y_0|X}(τ | 1)` from the observed distribution of `Y | X = 0`.
///
/// Under T-independence the quantile is point identified for `τ ∈ [a, b]`.
/// Unbounded supports give infinite endpoints where the formula reaches
/// `Q(0)` or `Q(1)`.
pub fn quantile_bounds_y0(assn: &AssumptionSpec, y_given_0: &Cdf, marg: &TreatmentMarginal, tau: f64) -> Result<BoundInterval> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::domain(format!("quantile level {tau} is not in [0, 1]")));
    }
    let q = |t: f64| y_given_0.quantile_clamped(t);
    let (p1, p0) = (marg.p1(), marg.p0());
    let (kind, a, b) = assn.normalized();
    let (lower, upper) = match kind {
        AssumptionKind::None => (q(0.0), q(1.0)),
        AssumptionKind::Full => unreachable!("normalized to T"),
        AssumptionKind::T => {
            let upper = if tau <= a {
                q(a)
            } else if tau <= b {
                q(tau)
            } else {
                q(1.0)
            };
            let lower = if tau < a {
                q(0.0)
            } else if tau <= b {
                q(tau)
            } else {
                q(b)
            };
            (lower, upper)
        }
        AssumptionKind::U => {
            let m = b - a;
            let lower = if (1.0 - m) * p1 <= a {
                if tau <= 1.0 - m {
                    q(0.0)
                } else {
                    q(tau + (b - 1.0) / p0)
                }
            } else if tau <= a / p1 {
                q(0.0)
            } else if tau <= a / p1 + m {
                q(tau - a / p1)
            } else {
                q(m)
            };
            let upper = if (1.0 - m) * p0 <= a {
                let c = 1.0 - m - (1.0 - b) / p1;
                if tau <= c {
                    q(1.0 - m)
                } else if tau <= 1.0 - (1.0 - b) / p1 {
                    q(tau + (1.0 - b) / p1)
                } else {
                    q(1.0)
                }
            } else if tau <= m {
                q(tau + a / p0)
            } else {
                q(1.0)
            };
            (lower, upper)
        }
    };
    BoundInterval::new(lower, upper)
}

/// Bounds on `E(Y_0 | X = 1)`, obtained by integrating the quantile bounds
/// over `τ ∈ (0, 1)` in closed form.
pub fn mean_bounds_y0(assn: &AssumptionSpec, y_given_0: &Cdf, marg: &TreatmentMarginal) -> Result<BoundInterval> {
    let q = |t: f64| y_given_0.quantile_clamped(t);
    let int = |s: f64, t: f64| -> Result<f64> {
        let (s, t) = (s.clamp(0.0, 1.0), t.clamp(0.0, 1.0));
        y_given_0.quantile_integral(s, t)
    };
    let (p1, p0) = (marg.p1(), marg.p0());
    let (kind, a, b) = assn.normalized();
    let (lower, upper) = match kind {
        AssumptionKind::None => (q(0.0), q(1.0)),
        AssumptionKind::Full => unreachable!("normalized to T"),
        AssumptionKind::T => {
            let upper = term(a, q(a)) + int(a, b)? + term(1.0 - b, q(1.0));
            let lower = term(a, q(0.0)) + int(a, b)? + term(1.0 - b, q(b));
            (lower, upper)
        }
        AssumptionKind::U => {
            let m = b - a;
            let lower = if (1.0 - m) * p1 <= a {
                let shift = (b - 1.0) / p0;
                term(1.0 - m, q(0.0)) + int(1.0 - m + shift, 1.0 + shift)?
            } else {
                term(a / p1, q(0.0)) + int(0.0, m)? + term(1.0 - m - a / p1, q(m))
            };
            let upper = if (1.0 - m) * p0 <= a {
                let tail = (1.0 - b) / p1;
                term(1.0 - m - tail, q(1.0 - m)) + int(1.0 - m, 1.0)? + term(tail, q(1.0))
            } else {
                int(a / p0, m + a / p0)? + term(1.0 - m, q(1.0))
            };
            (lower, upper)
        }
    };
    BoundInterval::new(lower, upper)
}

/// `coef · v`, dropping terms whose weight is zero so that an infinite
/// quantile with no mass contributes nothing.
fn term(coef: f64, v: f64) -> f64 {
    if coef <= 0.0 {
        0.0
    } else {
        coef * v
    }
}

/// Identified set for `ATT = E(Y_1 | X = 1) - E(Y_0 | X = 1)`.
pub fn att_identified_set(
    obs_mean_treated: f64,
    assn: &AssumptionSpec,
    y_given_0: &Cdf,
    marg: &TreatmentMarginal,
) -> Result<BoundInterval> {
    if !obs_mean_treated.is_finite() {
        return Err(Error::domain(format!("treated mean {obs_mean_treated} is not finite")));
    }
    Ok(mean_bounds_y0(assn, y_given_0, marg)?.subtracted_from(obs_mean_treated))
}

/// Identified set for `QTT(q) = Q_{Y_1|X}(q | 1) - Q_{Y_0|X}(q | 1)`.
pub fn qtt_identified_set(
    q: f64,
    obs_quantile_treated: f64,
    assn: &AssumptionSpec,
    y_given_0: &Cdf,
    marg: &TreatmentMarginal,
) -> Result<BoundInterval> {
    if !obs_quantile_treated.is_finite() {
        return Err(Error::domain(format!("treated quantile {obs_quantile_treated} is not finite")));
    }
    Ok(quantile_bounds_y0(assn, y_given_0, marg, q)?.subtracted_from(obs_quantile_treated))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(kind: AssumptionKind) -> (AssumptionSpec, Cdf, TreatmentMarginal) {
        (
            AssumptionSpec::new(kind, 0.25, 0.75).unwrap(),
            Cdf::unit_uniform(),
            TreatmentMarginal::new(0.5).unwrap(),
        )
    }

    fn assert_interval(iv: BoundInterval, lo: f64, hi: f64) {
        assert!((iv.lower - lo).abs() < 1e-12 && (iv.upper - hi).abs() < 1e-12, "{iv:?} vs [{lo}, {hi}]");
    }

    #[test]
    fn quantile_examples() {
        let (t, q, m) = setup(AssumptionKind::T);
        assert_interval(quantile_bounds_y0(&t, &q, &m, 0.5).unwrap(), 0.5, 0.5);
        assert_interval(quantile_bounds_y0(&t, &q, &m, 0.9).unwrap(), 0.75, 1.0);
        let (u, _, _) = setup(AssumptionKind::U);
        assert_interval(quantile_bounds_y0(&u, &q, &m, 0.75).unwrap(), 0.25, 1.0);
    }

    #[test]
    fn t_point_identified_on_closed_interval() {
        let (t, q, m) = setup(AssumptionKind::T);
        for tau in [0.25, 0.4, 0.75] {
            assert_eq!(quantile_bounds_y0(&t, &q, &m, tau).unwrap().width(), 0.0);
        }
    }

    #[test]
    fn mean_examples() {
        let (t, q, m) = setup(AssumptionKind::T);
        assert_interval(mean_bounds_y0(&t, &q, &m).unwrap(), 0.4375, 0.5625);
        let (u, _, _) = setup(AssumptionKind::U);
        assert_interval(mean_bounds_y0(&u, &q, &m).unwrap(), 0.125, 0.875);
        for p1 in [0.1, 0.5, 0.9] {
            let med = AssumptionSpec::new(AssumptionKind::T, 0.5, 0.5).unwrap();
            let m = TreatmentMarginal::new(p1).unwrap();
            assert_interval(mean_bounds_y0(&med, &q, &m).unwrap(), 0.25, 0.75);
        }
    }

    #[test]
    fn att_and_qtt_examples() {
        let (t, q, m) = setup(AssumptionKind::T);
        assert_interval(att_identified_set(1.0, &t, &q, &m).unwrap(), 0.4375, 0.5625);
        assert_interval(att_identified_set(0.5, &AssumptionSpec::full(), &q, &m).unwrap(), 0.0, 0.0);
        assert_interval(qtt_identified_set(0.9, 0.9, &t, &q, &m).unwrap(), -0.1, 0.15);
        assert_eq!(qtt_identified_set(0.5, 0.3, &t, &q, &m).unwrap().width(), 0.0);
    }

    #[test]
    fn unbounded_support_gives_infinite_no_assumption_bounds() {
        let iv = mean_bounds_y0(&AssumptionSpec::none(), &Cdf::standard_normal(), &TreatmentMarginal::new(0.4).unwrap()).unwrap();
        assert_eq!((iv.lower, iv.upper), (f64::NEG_INFINITY, f64::INFINITY));
        let t = AssumptionSpec::new(AssumptionKind::T, 0.0, 1.0).unwrap();
        let iv = mean_bounds_y0(&t, &Cdf::standard_normal(), &TreatmentMarginal::new(0.4).unwrap()).unwrap();
        assert!(iv.lower.abs() < 1e-12 && iv.upper.abs() < 1e-12, "{iv:?}");
    }
}
