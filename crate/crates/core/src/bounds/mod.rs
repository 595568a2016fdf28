//! Sharp identified sets under partial exogeneity.
//!
//! Assumption intervals are given in quantile units of `Y_0`: T-independence
//! on `[a, b]` means `F(Q(τ) | X = 0) = F(Q(τ) | X = 1) = τ` for `τ ∈ [a, b]`;
//! U-independence on `[a, b]` means the latent propensity score is constant on
//! `[Q(a), Q(b)]`. All bounds are computed on the rank scale and composed with
//! observable distributions, so they never need `F_{Y_0}` itself.
//!
//! Bounds are sharp for the interior of the identified set and are reported as
//! closed intervals.

mod breakdown;
mod cdf;
mod quantile;

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use breakdown::{breakdown_point, Breakdown, BREAKDOWN_RESOLUTION};
pub use cdf::{cdf_bounds, cdf_bounds_t, cdf_bounds_u, rank_cdf_bounds, CdfBounds};
pub use quantile::{att_identified_set, mean_bounds_y0, qtt_identified_set, quantile_bounds_y0};

const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssumptionKind {
    /// Cdf independence at every point of `[Q(a), Q(b)]`.
    T,
    /// Random assignment within `[Q(a), Q(b)]`.
    U,
    Full,
    None,
}

impl AssumptionKind {
    pub fn label(self) -> &'static str {
        match self {
            AssumptionKind::T => "T",
            AssumptionKind::U => "U",
            AssumptionKind::Full => "full",
            AssumptionKind::None => "none",
        }
    }
}

impl fmt::Display for AssumptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for AssumptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(AssumptionKind::T),
            "u" => Ok(AssumptionKind::U),
            "full" => Ok(AssumptionKind::Full),
            "none" => Ok(AssumptionKind::None),
            _ => Err(Error::domain(format!("unknown assumption kind `{s}` (expected T, U, full or none)"))),
        }
    }
}

/// An exogeneity assumption with its interval `[a, b]` in quantile units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionSpec {
    kind: AssumptionKind,
    a: f64,
    b: f64,
    delta: Option<f64>,
}

impl AssumptionSpec {
    pub fn new(kind: AssumptionKind, a: f64, b: f64) -> Result<Self> {
        match kind {
            AssumptionKind::Full => return Ok(Self::full()),
            AssumptionKind::None => return Ok(Self::none()),
            _ => {}
        }
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::domain(format!("assumption interval [{a}, {b}] must satisfy 0 <= a <= b <= 1")));
        }
        Ok(AssumptionSpec { kind, a, b, delta: None })
    }

    /// The symmetric family `[δ, 1 - δ]`, `δ ∈ [0, 0.5]`.
    pub fn from_delta(kind: AssumptionKind, delta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&delta) {
            return Err(Error::domain(format!("delta {delta} is not in [0, 0.5]")));
        }
        let mut s = Self::new(kind, delta, 1.0 - delta)?;
        if matches!(kind, AssumptionKind::T | AssumptionKind::U) {
            s.delta = Some(delta);
        }
        Ok(s)
    }

    pub fn full() -> Self {
        AssumptionSpec {
            kind: AssumptionKind::Full,
            a: 0.0,
            b: 1.0,
            delta: None,
        }
    }

    pub fn none() -> Self {
        AssumptionSpec {
            kind: AssumptionKind::None,
            a: f64::NAN,
            b: f64::NAN,
            delta: None,
        }
    }

    pub fn kind(&self) -> AssumptionKind {
        self.kind
    }

    /// `[a, b]`; `None` for the no-assumption case.
    pub fn interval(&self) -> Option<(f64, f64)> {
        (self.kind != AssumptionKind::None).then_some((self.a, self.b))
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    /// Kind and interval after folding `full` into T on `[0, 1]`.
    pub(crate) fn normalized(&self) -> (AssumptionKind, f64, f64) {
        match self.kind {
            AssumptionKind::Full => (AssumptionKind::T, 0.0, 1.0),
            k => (k, self.a, self.b),
        }
    }
}

/// `P(X = 1)` and `P(X = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreatmentMarginal {
    p1: f64,
}

impl TreatmentMarginal {
    pub fn new(p1: f64) -> Result<Self> {
        if !(p1 > 0.0 && p1 < 1.0) {
            return Err(Error::Overlap(p1));
        }
        Ok(TreatmentMarginal { p1 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    /// `P(X = x)` for `x ∈ {0, 1}`.
    pub fn share(&self, x: u8) -> f64 {
        if x == 1 {
            self.p1
        } else {
            self.p0()
        }
    }
}

/// Closed interval `[lower, upper]` over the extended reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
}

impl BoundInterval {
    /// Crossings within rounding error are collapsed to a point.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::domain("bound endpoint is NaN"));
        }
        if lower > upper {
            let scale = 1.0f64.max(lower.abs()).max(upper.abs());
            if lower - upper > ORDER_TOL * scale {
                return Err(Error::domain(format!("lower bound {lower} exceeds upper bound {upper}")));
            }
            return Ok(BoundInterval { lower: upper, upper });
        }
        Ok(BoundInterval { lower, upper })
    }

    pub fn point(v: f64) -> Self {
        BoundInterval { lower: v, upper: v }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }

    /// Whether `self ⊆ other` up to `tol`.
    pub fn is_within(&self, other: &BoundInterval, tol: f64) -> bool {
        self.lower >= other.lower - tol && self.upper <= other.upper + tol
    }

    /// `{v - x : x ∈ self}`.
    pub fn subtracted_from(&self, v: f64) -> BoundInterval {
        BoundInterval {
            lower: v - self.upper,
            upper: v - self.lower,
        }
    }
}

/// Bounds on one parameter along an index grid (`τ`, `δ` or `u`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub kind: AssumptionKind,
    pub param: String,
    index: Vec<f64>,
    intervals: Vec<BoundInterval>,
}

impl BoundCurve {
    pub fn new(kind: AssumptionKind, param: impl Into<String>, index: Vec<f64>, intervals: Vec<BoundInterval>) -> Result<Self> {
        if index.len() != intervals.len() {
            return Err(Error::InconsistentGrid(format!(
                "{} index values for {} intervals",
                index.len(),
                intervals.len()
            )));
        }
        if index.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InconsistentGrid("curve index is not strictly increasing".into()));
        }
        Ok(BoundCurve {
            kind,
            param: param.into(),
            index,
            intervals,
        })
    }

    pub fn index(&self) -> &[f64] {
        &self.index
    }

    pub fn intervals(&self) -> &[BoundInterval] {
        &self.intervals
    }

    /// CSV with header `index,lower,upper,kind,param`; numbers carry 17
    /// significant digits so the file round-trips exactly.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let kind = self.kind.label();
        w.write_record(["index", "lower", "upper", "kind", "param"]).expect("in-memory write");
        for (x, iv) in self.index.iter().zip(&self.intervals) {
            w.write_record([&fmt_num(*x), &fmt_num(iv.lower), &fmt_num(iv.upper), kind, &self.param])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut index = Vec::new();
        let mut intervals = Vec::new();
        let mut meta: Option<(AssumptionKind, String)> = None;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |j: usize| -> Result<f64> {
                rec.get(j)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Data { row: i + 1, msg: format!("bad number in column {j}") })
            };
            index.push(num(0)?);
            intervals.push(BoundInterval::new(num(1)?, num(2)?)?);
            if meta.is_none() {
                let kind = rec.get(3).unwrap_or("").parse()?;
                meta = Some((kind, rec.get(4).unwrap_or("").to_string()));
            }
        }
        let (kind, param) = meta.ok_or_else(|| Error::domain("empty curve"))?;
        Self::new(kind, param, index, intervals)
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}
