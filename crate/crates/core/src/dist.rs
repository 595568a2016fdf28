//! Univariate distribution functions.
//!
//! A [`Cdf`] is immutable once built. Every representation supports
//! evaluation, left-inverse quantiles, and exact partial moments
//! `∫_[lo,hi) y^k dF(y)` for `k ∈ {0, 1, 2}`, which is what the selection
//! checkers and the mean bounds integrate against.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

use crate::{Error, Result};

/// Default probability mass trimmed from each tail when a consumer has to
/// integrate numerically against an unbounded quantile function.
pub const DEFAULT_TAIL_EPS: f64 = 1e-6;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cdf.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal quantile, polished with one Newton step.
pub fn norm_quantile(tau: f64) -> f64 {
    if tau <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if tau >= 1.0 {
        return f64::INFINITY;
    }
    let z = -SQRT_2 * erfc_inv(2.0 * tau);
    let d = norm_pdf(z);
    if d > 1e-300 {
        z - (norm_cdf(z) - tau) / d
    } else {
        z
    }
}

// z * φ(z), with the limit 0 at ±∞.
fn z_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        z * norm_pdf(z)
    }
}

/// `∫_{zl}^{zu} (c + s z)^k φ(z) dz` for `k ∈ {0,1,2}`.
fn normal_moment(k: u8, c: f64, s: f64, zl: f64, zu: f64) -> f64 {
    let dp = norm_cdf(zu) - norm_cdf(zl);
    let m1 = norm_pdf(zl) - norm_pdf(zu);
    match k {
        0 => dp,
        1 => c * dp + s * m1,
        _ => c * c * dp + 2.0 * c * s * m1 + s * s * (dp + z_pdf(zl) - z_pdf(zu)),
    }
}

/// `∫_{lo}^{hi} y^k dy`.
fn power_integral(k: u8, lo: f64, hi: f64) -> f64 {
    match k {
        0 => hi - lo,
        1 => 0.5 * (hi * hi - lo * lo),
        _ => (hi * hi * hi - lo * lo * lo) / 3.0,
    }
}

fn check_prob(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {tau} is outside [0, 1]")))
    }
}

/// Empirical distribution of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    sorted: Vec<f64>,
}

/// Continuous piecewise-linear cdf through `(x, F(x))` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

/// Integrated-Gaussian-kernel cdf on the sample range `[min, max]`: each
/// kernel is truncated to the range and renormalized, so the estimate is
/// strictly increasing on the range and reduces to the empirical cdf as
/// `h → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCdf {
    centers: Vec<f64>,
    bandwidth: f64,
    lo: f64,
    hi: f64,
    /// `Φ((min - c)/h)` per center.
    below: Vec<f64>,
    /// `1 / (Φ((max - c)/h) - Φ((min - c)/h))` per center.
    scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Step(StepCdf),
    Linear(PiecewiseLinearCdf),
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    Kernel(KernelCdf),
}

/// A univariate cdf with support `[lower, upper]` (possibly infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct Cdf(Repr);

impl Cdf {
    /// Empirical cdf of `samples`. `quantile(k/n)` returns the k-th order
    /// statistic.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical cdf needs at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample value {bad} is not finite")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Cdf(Repr::Step(StepCdf { sorted })))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!("uniform support [{lo}, {hi}] is invalid")));
        }
        Ok(Cdf(Repr::Uniform { lo, hi }))
    }

    /// Uniform on `[0, 1]`, the rank scale.
    pub fn unit_uniform() -> Self {
        Cdf(Repr::Uniform { lo: 0.0, hi: 1.0 })
    }

    pub fn standard_normal() -> Self {
        Cdf(Repr::Normal { mean: 0.0, sd: 1.0 })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::domain(format!("normal({mean}, {sd}) is invalid")));
        }
        Ok(Cdf(Repr::Normal { mean, sd }))
    }

    /// Piecewise-linear cdf through `knots`. The x values must be strictly
    /// increasing, the cdf values nondecreasing from 0 to 1.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::domain("piecewise-linear cdf needs at least two knots"));
        }
        for w in knots.windows(2) {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if !(x1 > x0) {
                return Err(Error::domain(format!("knot x values {x0}, {x1} are not strictly increasing")));
            }
            if f1 < f0 {
                return Err(Error::domain(format!("knot cdf values {f0}, {f1} decrease")));
            }
        }
        if knots.iter().any(|&(x, f)| !x.is_finite() || !f.is_finite()) {
            return Err(Error::domain("knots must be finite"));
        }
        let (first, last) = (knots[0].1, knots[knots.len() - 1].1);
        if first.abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("knot cdf values must run from 0 to 1, got {first}..{last}")));
        }
        let xs = knots.iter().map(|k| k.0).collect();
        let mut fs: Vec<f64> = knots.iter().map(|k| k.1).collect();
        fs[0] = 0.0;
        *fs.last_mut().unwrap() = 1.0;
        Ok(Cdf(Repr::Linear(PiecewiseLinearCdf { xs, fs })))
    }

    /// Gaussian-kernel cdf over `samples` with bandwidth `h`, supported on
    /// the sample range; `h = 0` or a constant sample gives the empirical cdf.
    pub(crate) fn kernel(samples: &[f64], h: f64) -> Result<Self> {
        let step = Cdf::from_samples(samples)?;
        let Repr::Step(StepCdf { sorted }) = step.0 else { unreachable!() };
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        if !(h > 0.0) || !(hi > lo) {
            return Ok(Cdf(Repr::Step(StepCdf { sorted })));
        }
        let below: Vec<f64> = sorted.iter().map(|c| norm_cdf((lo - c) / h)).collect();
        let scale = sorted
            .iter()
            .zip(&below)
            .map(|(c, b)| 1.0 / (norm_cdf((hi - c) / h) - b))
            .collect();
        Ok(Cdf(Repr::Kernel(KernelCdf {
            centers: sorted,
            bandwidth: h,
            lo,
            hi,
            below,
            scale,
        })))
    }

    /// Lower and upper support endpoints.
    pub fn support(&self) -> (f64, f64) {
        match &self.0 {
            Repr::Step(s) => (s.sorted[0], s.sorted[s.sorted.len() - 1]),
            Repr::Linear(l) => (l.xs[0], l.xs[l.xs.len() - 1]),
            Repr::Uniform { lo, hi } => (*lo, *hi),
            Repr::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Repr::Kernel(k) => (k.lo, k.hi),
        }
    }

    /// Whether the cdf is continuous (everything except the empirical cdf).
    pub fn is_continuous(&self) -> bool {
        !matches!(self.0, Repr::Step(_))
    }

    /// Sample size behind an empirical or kernel cdf.
    pub fn sample_size(&self) -> Option<usize> {
        match &self.0 {
            Repr::Step(s) => Some(s.sorted.len()),
            Repr::Kernel(k) => Some(k.centers.len()),
            _ => None,
        }
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        match &self.0 {
            Repr::Step(s) => {
                let k = s.sorted.partition_point(|&v| v <= y);
                k as f64 / s.sorted.len() as f64
            }
            Repr::Linear(l) => l.evaluate(y),
            Repr::Uniform { lo, hi } => ((y - lo) / (hi - lo)).clamp(0.0, 1.0),
            Repr::Normal { mean, sd } => norm_cdf((y - mean) / sd),
            Repr::Kernel(k) => k.evaluate(y),
        }
    }

    /// Left-inverse `inf{y : F(y) ≥ τ}`, with `Q(0)` and `Q(1)` the support
    /// endpoints.
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        check_prob(tau)?;
        let (lo, hi) = self.support();
        if tau == 0.0 {
            return Ok(lo);
        }
        Ok(match &self.0 {
            Repr::Step(s) => {
                let n = s.sorted.len();
                let t = tau * n as f64;
                let k = if (t - t.round()).abs() < 1e-9 { t.round() } else { t.ceil() };
                s.sorted[(k as usize).clamp(1, n) - 1]
            }
            Repr::Linear(l) => l.quantile(tau),
            Repr::Uniform { lo, hi } => {
                if tau == 1.0 {
                    *hi
                } else {
                    lo + tau * (hi - lo)
                }
            }
            Repr::Normal { mean, sd } => mean + sd * norm_quantile(tau),
            Repr::Kernel(k) => {
                if tau == 1.0 {
                    hi
                } else {
                    k.quantile(tau)
                }
            }
        })
    }

    /// Quantile for arguments that may stray outside [0, 1] by rounding.
    pub(crate) fn quantile_clamped(&self, tau: f64) -> f64 {
        self.quantile(tau.clamp(0.0, 1.0)).expect("clamped probability")
    }

    /// Rank `F(y)`; requires a continuous representation.
    pub fn rank_transform(&self, y: f64) -> Result<f64> {
        if !self.is_continuous() {
            return Err(Error::UnsupportedRepresentation(
                "rank transform needs a continuous cdf; empirical step cdfs have ties",
            ));
        }
        Ok(self.evaluate(y))
    }

    /// `∫_[lo, hi) y^k dF(y)` for `k ∈ {0, 1, 2}`.
    pub fn partial_moment(&self, k: u8, lo: f64, hi: f64) -> f64 {
        assert!(k <= 2, "partial moments are implemented up to order 2");
        if !(hi > lo) {
            return 0.0;
        }
        match &self.0 {
            Repr::Step(s) => {
                let i0 = s.sorted.partition_point(|&v| v < lo);
                let i1 = s.sorted.partition_point(|&v| v < hi);
                let sum: f64 = s.sorted[i0..i1].iter().map(|v| v.powi(k as i32)).sum();
                sum / s.sorted.len() as f64
            }
            Repr::Linear(l) => l.partial_moment(k, lo, hi),
            Repr::Uniform { lo: a, hi: b } => {
                let (l, h) = (lo.max(*a), hi.min(*b));
                if h <= l {
                    0.0
                } else {
                    power_integral(k, l, h) / (b - a)
                }
            }
            Repr::Normal { mean, sd } => normal_moment(k, *mean, *sd, (lo - mean) / sd, (hi - mean) / sd),
            Repr::Kernel(kc) => kc.partial_moment(k, lo, hi),
        }
    }

    /// `∫_{t0}^{t1} Q(τ) dτ`, which may be infinite for unbounded supports.
    pub fn quantile_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        check_prob(t0)?;
        check_prob(t1)?;
        if t1 <= t0 {
            return Ok(0.0);
        }
        match &self.0 {
            Repr::Step(s) => {
                let n = s.sorted.len() as f64;
                Ok(s.sorted
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let (cl, ch) = (i as f64 / n, (i + 1) as f64 / n);
                        let w = ch.min(t1) - cl.max(t0);
                        if w > 0.0 {
                            v * w
                        } else {
                            0.0
                        }
                    })
                    .sum())
            }
            _ => {
                // Continuous and strictly increasing on the support, so the
                // substitution y = Q(τ) applies.
                let (y0, y1) = (self.quantile(t0)?, self.quantile(t1)?);
                let lo = if t0 == 0.0 { f64::NEG_INFINITY } else { y0 };
                let hi = if t1 == 1.0 { f64::INFINITY } else { y1 };
                Ok(self.partial_moment(1, lo, hi))
            }
        }
    }

    /// Mean `∫_0^1 Q(τ) dτ`.
    pub fn mean(&self) -> f64 {
        self.quantile_integral(0.0, 1.0).expect("valid range")
    }
}

/// Empirical cdf; see [`Cdf::from_samples`].
pub fn step_cdf_from_samples(samples: &[f64]) -> Result<Cdf> {
    Cdf::from_samples(samples)
}

/// Left-inverse quantile; see [`Cdf::quantile`].
pub fn quantile(cdf: &Cdf, tau: f64) -> Result<f64> {
    cdf.quantile(tau)
}

/// Rank `F(y)`; see [`Cdf::rank_transform`].
pub fn rank_transform(cdf: &Cdf, y: f64) -> Result<f64> {
    cdf.rank_transform(y)
}

impl PiecewiseLinearCdf {
    fn evaluate(&self, y: f64) -> f64 {
        let xs = &self.xs;
        if y < xs[0] {
            return 0.0;
        }
        if y >= xs[xs.len() - 1] {
            return 1.0;
        }
        let i = xs.partition_point(|&x| x <= y);
        let (x0, x1, f0, f1) = (xs[i - 1], xs[i], self.fs[i - 1], self.fs[i]);
        f0 + (f1 - f0) * (y - x0) / (x1 - x0)
    }

    fn quantile(&self, tau: f64) -> f64 {
        let i = self.fs.partition_point(|&f| f < tau);
        if i == 0 {
            return self.xs[0];
        }
        let i = i.min(self.fs.len() - 1);
        let (x0, x1, f0, f1) = (self.xs[i - 1], self.xs[i], self.fs[i - 1], self.fs[i]);
        x0 + (tau - f0) / (f1 - f0) * (x1 - x0)
    }

    fn partial_moment(&self, k: u8, lo: f64, hi: f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.fs.windows(2))
            .map(|(x, f)| {
                let (l, h) = (lo.max(x[0]), hi.min(x[1]));
                if h <= l || f[1] == f[0] {
                    0.0
                } else {
                    (f[1] - f[0]) / (x[1] - x[0]) * power_integral(k, l, h)
                }
            })
            .sum()
    }
}

// Centers further than this many bandwidths away contribute exactly 0 or 1
// to the mixture cdf in double precision.
const KERNEL_REACH: f64 = 9.0;

impl KernelCdf {
    fn window(&self, y: f64) -> (usize, usize) {
        let r = KERNEL_REACH * self.bandwidth;
        let i0 = self.centers.partition_point(|&c| c < y - r);
        let i1 = self.centers.partition_point(|&c| c <= y + r);
        (i0, i1)
    }

    fn evaluate(&self, y: f64) -> f64 {
        if y <= self.lo {
            return 0.0;
        }
        if y >= self.hi {
            return 1.0;
        }
        let (i0, i1) = self.window(y);
        let inner: f64 = (i0..i1)
            .map(|i| (norm_cdf((y - self.centers[i]) / self.bandwidth) - self.below[i]) * self.scale[i])
            .sum();
        ((i0 as f64 + inner) / self.centers.len() as f64).clamp(0.0, 1.0)
    }

    fn density(&self, y: f64) -> f64 {
        let (i0, i1) = self.window(y);
        let s: f64 = (i0..i1)
            .map(|i| norm_pdf((y - self.centers[i]) / self.bandwidth) * self.scale[i])
            .sum();
        s / (self.bandwidth * self.centers.len() as f64)
    }

    // Safeguarded Newton on a strictly increasing function.
    fn quantile(&self, tau: f64) -> f64 {
        let (mut a, mut b) = (self.lo, self.hi);
        let mut y = a + tau * (b - a);
        for _ in 0..200 {
            let g = self.evaluate(y) - tau;
            if g == 0.0 {
                return y;
            }
            if g < 0.0 {
                a = y;
            } else {
                b = y;
            }
            if b - a <= 1e-15 * (1.0 + y.abs()) {
                break;
            }
            let d = self.density(y);
            let step = if d > 0.0 { y - g / d } else { f64::NAN };
            y = if step > a && step < b { step } else { 0.5 * (a + b) };
        }
        // Left-inverse: return the smallest point of the final bracket that
        // reaches τ.
        if self.evaluate(a) >= tau {
            a
        } else {
            b.min(y.max(a))
        }
    }

    fn partial_moment(&self, k: u8, lo: f64, hi: f64) -> f64 {
        let (l, h) = (lo.max(self.lo), hi.min(self.hi));
        if h <= l {
            return 0.0;
        }
        let s = self.bandwidth;
        let sum: f64 = self
            .centers
            .iter()
            .zip(&self.scale)
            .map(|(&c, w)| w * normal_moment(k, c, s, (l - c) / s, (h - c) / s))
            .sum();
        sum / self.centers.len() as f64
    }
}
