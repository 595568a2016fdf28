use super::{AssumptionKind, BoundInterval, TreatmentMarginal};
use crate::dist::Cdf;
use crate::{Error, Result};

const CASE_TOL: f64 = 1e-12;

/// Bounds on `F_{U|X}(u | x)` given the marginal `F_U`, `p_x = P(X = x)` and an
/// assumption interval `[a, b]` in outcome units.
#[derive(Debug, Clone)]
pub struct CdfBounds {
    dist: Cdf,
    kind: AssumptionKind,
    p: f64,
    fa: f64,
    fb: f64,
}

impl CdfBounds {
    pub fn kind(&self) -> AssumptionKind {
        self.kind
    }

    pub fn lower(&self, u: f64) -> f64 {
        self.at(u).lower
    }

    pub fn upper(&self, u: f64) -> f64 {
        self.at(u).upper
    }

    pub fn at(&self, u: f64) -> BoundInterval {
        let (lo, up) = rank_cdf_bounds(self.kind, self.p, self.fa, self.fb, self.dist.evaluate(u));
        BoundInterval { lower: lo, upper: up }
    }

    /// `ε·lower + (1 - ε)·upper`.
    pub fn mixture(&self, eps: f64, u: f64) -> f64 {
        let iv = self.at(u);
        eps * iv.lower + (1.0 - eps) * iv.upper
    }

    /// The rank-scale interval `[F_U(a), F_U(b)]`.
    pub fn rank_interval(&self) -> (f64, f64) {
        (self.fa, self.fb)
    }
}

/// T-independence bounds: `U` is cdf independent of `X` at every point of
/// `[a, b]`.
pub fn cdf_bounds_t(dist: &Cdf, p_x: f64, a: f64, b: f64) -> Result<CdfBounds> {
    cdf_bounds(AssumptionKind::T, dist, p_x, a, b)
}

/// U-independence bounds: `P(X = x | U = u) = p_x` for almost all `u ∈ [a, b]`.
pub fn cdf_bounds_u(dist: &Cdf, p_x: f64, a: f64, b: f64) -> Result<CdfBounds> {
    cdf_bounds(AssumptionKind::U, dist, p_x, a, b)
}

pub fn cdf_bounds(kind: AssumptionKind, dist: &Cdf, p_x: f64, a: f64, b: f64) -> Result<CdfBounds> {
    let p = TreatmentMarginal::new(p_x)?.p1();
    let (lo, hi) = dist.support();
    let (fa, fb) = match kind {
        AssumptionKind::Full => (0.0, 1.0),
        AssumptionKind::None => (0.0, 0.0),
        _ => {
            if a.is_nan() || b.is_nan() || a > b || a < lo || b > hi {
                return Err(Error::domain(format!(
                    "assumption interval [{a}, {b}] is not an ordered subinterval of the support [{lo}, {hi}]"
                )));
            }
            (dist.evaluate(a), dist.evaluate(b))
        }
    };
    Ok(CdfBounds {
        dist: dist.clone(),
        kind,
        p,
        fa,
        fb,
    })
}

/// Bounds on `F_{R|X}(f | x)` for a uniform rank `R`, given `p = p_x` and
/// the rank interval `[fa, fb]`. Returns `(lower, upper)`.
pub fn rank_cdf_bounds(kind: AssumptionKind, p: f64, fa: f64, fb: f64, f: f64) -> (f64, f64) {
    let f = f.clamp(0.0, 1.0);
    match kind {
        AssumptionKind::Full => (f, f),
        AssumptionKind::None => (none_lower(p, f), none_upper(p, f)),
        AssumptionKind::T => (t_lower(p, fa, fb, f), t_upper(p, fa, fb, f)),
        AssumptionKind::U => (u_lower(p, fa, fb, f), u_upper(p, fa, fb, f)),
    }
}

fn none_upper(p: f64, f: f64) -> f64 {
    (f / p).min(1.0)
}

fn none_lower(p: f64, f: f64) -> f64 {
    (1.0 + (f - 1.0) / p).max(0.0)
}

fn t_upper(p: f64, a: f64, b: f64, f: f64) -> f64 {
    if f <= p * a {
        f / p
    } else if f <= a {
        a
    } else if f <= b {
        f
    } else if f <= p + b * (1.0 - p) {
        (f - b) / p + b
    } else {
        1.0
    }
}

fn t_lower(p: f64, a: f64, b: f64, f: f64) -> f64 {
    if f <= (1.0 - p) * a {
        0.0
    } else if f <= a {
        (f - a) / p + a
    } else if f <= b {
        f
    } else if f <= p * b + 1.0 - p {
        b
    } else {
        (f - 1.0) / p + 1.0
    }
}

fn u_lower(p: f64, a: f64, b: f64, f: f64) -> f64 {
    let m = b - a;
    let cut = (1.0 - m) * (1.0 - p);
    let case1 = || {
        if f <= cut {
            0.0
        } else if f <= a {
            (f - cut) / p
        } else if f <= b {
            (b - 1.0) * (1.0 - p) / p + f
        } else {
            (f - 1.0) / p + 1.0
        }
    };
    let case2 = || {
        if f <= a {
            0.0
        } else if f <= b {
            f - a
        } else if f <= p * m + 1.0 - p {
            m
        } else {
            (f - 1.0) / p + 1.0
        }
    };
    split_case(cut, a, case1, case2)
}

fn u_upper(p: f64, a: f64, b: f64, f: f64) -> f64 {
    let m = b - a;
    let cut = (1.0 - m) * p;
    let case1 = || {
        if f <= cut {
            f / p
        } else if f <= a {
            1.0 - m
        } else if f <= b {
            1.0 - (b - f)
        } else {
            1.0
        }
    };
    let case2 = || {
        if f <= a {
            f / p
        } else if f <= b {
            a / p + f - a
        } else if f <= m * (1.0 - p) + p {
            (m * (p - 1.0) + f) / p
        } else {
            1.0
        }
    };
    split_case(cut, a, case1, case2)
}

/// Case 1 applies when `cut <= a`. On the boundary both formulas are valid and
/// must agree.
fn split_case(cut: f64, a: f64, case1: impl Fn() -> f64, case2: impl Fn() -> f64) -> f64 {
    if cut < a {
        case1()
    } else if cut == a {
        let (v1, v2) = (case1(), case2());
        debug_assert!((v1 - v2).abs() <= CASE_TOL, "case formulas disagree on the boundary: {v1} vs {v2}");
        v1
    } else {
        case2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn t_uniform_example() {
        let b = cdf_bounds_t(&Cdf::unit_uniform(), 0.5, 0.25, 0.75).unwrap();
        assert!(close(b.upper(0.1), 0.2));
        assert!(close(b.upper(0.5), 0.5));
        assert!(close(b.upper(0.8), 0.85));
        assert!(close(b.lower(0.2), 0.15));
        assert!(close(b.lower(0.9), 0.8));
    }

    #[test]
    fn u_uniform_example() {
        let b = cdf_bounds_u(&Cdf::unit_uniform(), 0.5, 0.25, 0.75).unwrap();
        assert!(close(b.upper(0.5), 0.75));
        assert!(close(b.lower(0.5), 0.25));
        assert!(close(b.lower(0.9), 0.8));
    }

    #[test]
    fn whole_support_is_full_independence() {
        let d = Cdf::normal(1.0, 2.0).unwrap();
        let (lo, hi) = d.support();
        let b = cdf_bounds_t(&d, 0.3, lo, hi).unwrap();
        for u in [-3.0, 0.0, 1.0, 2.5, 7.0] {
            assert_eq!(b.lower(u), d.evaluate(u));
            assert_eq!(b.upper(u), d.evaluate(u));
        }
    }

    #[test]
    fn collapsed_u_interval_is_no_assumption() {
        for p in [0.2, 0.5, 0.8] {
            let b = cdf_bounds_u(&Cdf::unit_uniform(), p, 0.5, 0.5).unwrap();
            for i in 0..=100 {
                let f = i as f64 / 100.0;
                assert!((b.lower(f) - none_lower(p, f)).abs() < 1e-12);
                assert!((b.upper(f) - none_upper(p, f)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn case_split_is_continuous() {
        // pick p so that (1 - m) p = a exactly, then perturb
        let (a, b) = (0.2, 0.6);
        let p_star = a / (1.0 - (b - a));
        for i in 0..=200 {
            let f = i as f64 / 200.0;
            let below = u_upper(p_star - 1e-13, a, b, f);
            let above = u_upper(p_star + 1e-13, a, b, f);
            assert!((below - above).abs() < 1e-9, "f = {f}: {below} vs {above}");
            let below = u_lower(1.0 - p_star - 1e-13, a, b, f);
            let above = u_lower(1.0 - p_star + 1e-13, a, b, f);
            assert!((below - above).abs() < 1e-9, "f = {f}: {below} vs {above}");
        }
    }

    #[test]
    fn rejects_bad_intervals() {
        let d = Cdf::unit_uniform();
        assert!(cdf_bounds_t(&d, 0.5, 0.8, 0.2).is_err());
        assert!(cdf_bounds_u(&d, 0.5, -0.5, 0.2).is_err());
        assert!(matches!(cdf_bounds_t(&d, 1.0, 0.2, 0.8), Err(Error::Overlap(_))));
    }
}
