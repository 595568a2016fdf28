use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{norm_quantile, Cdf};
use crate::estimate::Dataset;
use crate::selection::{treatment_share, PropensityScore};
use crate::{Error, Result};

const DEGENERATE_SHARE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Simulation {
    /// Columns `y` (the potential outcome) and `x`.
    pub dataset: Dataset,
    /// `∫ p dF`, the population treatment share.
    pub treatment_share: f64,
    pub warning: Option<String>,
}

/// Draws `Y ~ dist` by inverse transform and `X ~ Bernoulli(p(Y))`, using a
/// ChaCha8 stream seeded with `seed`.
pub fn simulate_joint(p: &PropensityScore, dist: &Cdf, n: usize, seed: u64) -> Result<Simulation> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let share = treatment_share(p, dist)?;
    let warning = (!(DEGENERATE_SHARE..=1.0 - DEGENERATE_SHARE).contains(&share))
        .then(|| format!("treatment share {share} leaves one arm empty in the population"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        let v = dist.quantile(open_unit(&mut rng))?;
        let prob = p
            .evaluate(v)
            .ok_or_else(|| Error::domain(format!("draw {v} lies outside the score's domain")))?;
        y.push(v);
        x.push(u8::from(rng.random::<f64>() < prob));
    }
    Ok(Simulation {
        dataset: Dataset::from_pairs(y, x)?,
        treatment_share: share,
        warning,
    })
}

/// Uniform draw on the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// A panel with columns `logwage`, `not_abducted`, `age`, `hhsize` and
/// `wage`. Age and household size are discrete; treatment shares differ by
/// covariate cell and selection is monotone in the untreated outcome's rank
/// outside its middle 60%.
pub fn synthetic_panel(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut y, mut x, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let age = rng.random_range(14..=30) as f64;
        let hh = rng.random_range(2..=12) as f64;
        let (old, big) = (age > 22.0, hh > 7.0);
        let r0 = open_unit(&mut rng);
        let y0 = 0.35 * f64::from(u8::from(old)) + 0.2 * f64::from(u8::from(big)) + 0.9 * norm_quantile(r0);
        let base = 0.5 + 0.1 * f64::from(u8::from(old)) - 0.08 * f64::from(u8::from(big));
        let tilt = if (0.2..=0.8).contains(&r0) { 0.0 } else { 0.35 * (r0 - 0.5) };
        let treated = rng.random::<f64>() < (base + tilt).clamp(0.05, 0.95);
        let effect = if treated { 0.25 } else { 0.0 };
        y.push(y0 + effect + 2.0);
        x.push(u8::from(treated));
        w.push(vec![age, hh]);
    }
    let wages: Vec<f64> = y.iter().map(|v: &f64| (v.exp() * 100.0).round() / 100.0).collect();
    let logwage: Vec<f64> = wages.iter().map(|v| v.ln()).collect();
    for (row, wage) in w.iter_mut().zip(&wages) {
        row.push(*wage);
    }
    Dataset::new(
        "logwage",
        "not_abducted",
        vec!["age".into(), "hhsize".into(), "wage".into()],
        logwage,
        x,
        w,
    )
}
