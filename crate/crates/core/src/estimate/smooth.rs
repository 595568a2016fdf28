use serde::{Deserialize, Serialize};

use crate::dist::Cdf;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    Fixed(f64),
    /// `0.9 · min(sd, IQR / 1.34) · n^(-1/5)`.
    Silverman,
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("silverman") {
            return Ok(Bandwidth::Silverman);
        }
        s.parse::<f64>()
            .map(Bandwidth::Fixed)
            .map_err(|_| Error::domain(format!("bandwidth `{s}` is neither a number nor `silverman`")))
    }
}

fn type7_quantile(sorted: &[f64], t: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * t;
    let (i, frac) = (h.floor() as usize, h - h.floor());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Silverman's rule of thumb; falls back to the standard deviation when the
/// interquartile range is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::domain("plug-in bandwidth needs at least two samples"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = type7_quantile(&sorted, 0.75) - type7_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Integrated-Gaussian-kernel estimate of the cdf of `samples`, restricted
/// to the sample range. Bandwidth zero gives the empirical cdf.
pub fn smoothed_cdf(samples: &[f64], bandwidth: Bandwidth) -> Result<Cdf> {
    let h = match bandwidth {
        Bandwidth::Fixed(h) if h < 0.0 || h.is_nan() => {
            return Err(Error::domain(format!("bandwidth {h} is negative")));
        }
        Bandwidth::Fixed(h) => h,
        Bandwidth::Silverman => silverman_bandwidth(samples)?,
    };
    Cdf::kernel(samples, h)
}
