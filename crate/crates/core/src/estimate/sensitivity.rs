use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{cell_partition, smoothed_cdf, Bandwidth, Cell, CellRule, Dataset};
use crate::bounds::{
    att_identified_set, breakdown_point, qtt_identified_set, AssumptionKind, AssumptionSpec, BoundCurve, BoundInterval,
    Breakdown, TreatmentMarginal,
};
use crate::dist::Cdf;
use crate::{Error, Result};

/// Default number of equispaced δ values on `[0, 0.5]`.
pub const DEFAULT_DELTA_POINTS: usize = 101;

pub fn default_delta_grid() -> Vec<f64> {
    delta_grid(DEFAULT_DELTA_POINTS)
}

pub fn delta_grid(points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k).map(|i| 0.5 * i as f64 / k as f64).collect()
}

/// Target parameter within a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    /// Average treatment effect on the treated.
    Catt,
    /// Quantile treatment effect on the treated at the given level.
    Cqtt(f64),
}

impl Param {
    /// File-name friendly form, e.g. `catt` or `cqtt_0.5`.
    pub fn slug(&self) -> String {
        match self {
            Param::Catt => "catt".into(),
            Param::Cqtt(q) => format!("cqtt_{q}"),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Catt => f.write_str("CATT"),
            Param::Cqtt(q) => write!(f, "CQTT({q})"),
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;

    /// Accepts `CATT`, `CQTT(0.5)` and `CQTT:0.5`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        if t == "CATT" {
            return Ok(Param::Catt);
        }
        let level = t
            .strip_prefix("CQTT(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("CQTT:"))
            .ok_or_else(|| Error::domain(format!("unknown parameter `{s}` (expected CATT or CQTT(q))")))?;
        let q: f64 = level
            .parse()
            .map_err(|_| Error::domain(format!("quantile level in `{s}` is not a number")))?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level {q} is not in (0, 1)")));
        }
        Ok(Param::Cqtt(q))
    }
}

impl Serialize for Param {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Plug-in inputs for one cell: smoothed arm cdfs and the treated mean.
#[derive(Debug, Clone)]
pub struct CellFit {
    pub f0: Cdf,
    pub f1: Cdf,
    pub mean1: f64,
    pub marginal: TreatmentMarginal,
}

impl CellFit {
    pub fn new(cell: &Cell, bandwidth: Bandwidth) -> Result<Self> {
        if cell.y0.is_empty() || cell.y1.is_empty() {
            return Err(Error::Overlap(cell.p1_hat()));
        }
        Ok(CellFit {
            f0: smoothed_cdf(&cell.y0, bandwidth)?,
            f1: smoothed_cdf(&cell.y1, bandwidth)?,
            mean1: cell.y1.iter().sum::<f64>() / cell.y1.len() as f64,
            marginal: TreatmentMarginal::new(cell.p1_hat())?,
        })
    }

    /// Identified set for `param` under `assn`.
    pub fn bounds(&self, param: Param, assn: &AssumptionSpec) -> Result<BoundInterval> {
        match param {
            Param::Catt => att_identified_set(self.mean1, assn, &self.f0, &self.marginal),
            Param::Cqtt(q) => qtt_identified_set(q, self.f1.quantile(q)?, assn, &self.f0, &self.marginal),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamBreakdown {
    pub param: Param,
    pub kind: AssumptionKind,
    /// `None` when the lower-bound curve could not be bisected.
    pub breakdown: Option<Breakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Bound curves over the δ grid and breakdown points for one cell and kind.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityResult {
    pub cell: String,
    pub kind: AssumptionKind,
    #[serde(skip)]
    pub curves: Vec<BoundCurve>,
    pub breakdowns: Vec<ParamBreakdown>,
}

/// Plug-in bound curves for each parameter over `[δ, 1 - δ]` families, with
/// the breakdown point of each lower-bound curve refined by bisection.
pub fn estimate_sensitivity_curve(
    cell: &Cell,
    kind: AssumptionKind,
    deltas: &[f64],
    params: &[Param],
    bandwidth: Bandwidth,
) -> Result<SensitivityResult> {
    if !matches!(kind, AssumptionKind::T | AssumptionKind::U) {
        return Err(Error::domain("sensitivity curves are defined for T and U kinds"));
    }
    let fit = CellFit::new(cell, bandwidth)?;
    let mut curves = Vec::with_capacity(params.len());
    let mut breakdowns = Vec::with_capacity(params.len());
    for &param in params {
        let intervals = deltas
            .iter()
            .map(|&d| fit.bounds(param, &AssumptionSpec::from_delta(kind, d)?))
            .collect::<Result<Vec<_>>>()?;
        curves.push(BoundCurve::new(kind, param.to_string(), deltas.to_vec(), intervals)?);
        let lb = |d: f64| Ok(fit.bounds(param, &AssumptionSpec::from_delta(kind, d)?)?.lower);
        let (breakdown, note) = match breakdown_point(lb, 0.0) {
            Ok(b) => {
                let note = b.fails_at_point_identification.then(|| "fails at point identification".to_string());
                (Some(b), note)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        breakdowns.push(ParamBreakdown {
            param,
            kind,
            breakdown,
            note,
        });
    }
    Ok(SensitivityResult {
        cell: cell.label.clone(),
        kind,
        curves,
        breakdowns,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub covariates: Vec<String>,
    pub rule: CellRule,
    pub kinds: Vec<AssumptionKind>,
    pub params: Vec<Param>,
    pub deltas: Vec<f64>,
    pub bandwidth: Bandwidth,
    pub jobs: usize,
}

impl PipelineConfig {
    pub fn new(covariates: Vec<String>) -> Self {
        PipelineConfig {
            covariates,
            rule: CellRule::MedianSplit,
            kinds: vec![AssumptionKind::T, AssumptionKind::U],
            params: vec![Param::Catt, Param::Cqtt(0.5)],
            deltas: default_delta_grid(),
            bandwidth: Bandwidth::Silverman,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub index: usize,
    pub label: String,
    pub n0: usize,
    pub n1: usize,
    pub p1_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub files: Vec<String>,
    pub breakdowns: Vec<ParamBreakdown>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivitySummary {
    pub rows: usize,
    pub rule: CellRule,
    pub bandwidth: Bandwidth,
    pub delta_points: usize,
    pub cells: Vec<CellSummary>,
    pub warnings: Vec<String>,
}

/// Runs every (cell, kind) estimate, writes one curve CSV per
/// (cell, parameter, kind) and `summary.json` into `out_dir`. Output is
/// independent of `jobs`.
pub fn run_pipeline(ds: &Dataset, config: &PipelineConfig, out_dir: &Path) -> Result<SensitivitySummary> {
    if config.deltas.windows(2).any(|w| !(w[1] > w[0])) || config.deltas.iter().any(|d| !(0.0..=0.5).contains(d)) {
        return Err(Error::InconsistentGrid("delta grid must be strictly increasing within [0, 0.5]".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let partition = cell_partition(ds, &config.covariates, config.rule)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let per_cell: Vec<Result<CellSummary>> = pool.install(|| {
        partition
            .cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| summarize_cell(i, cell, config, out_dir))
            .collect()
    });
    let cells = per_cell.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = SensitivitySummary {
        rows: ds.len(),
        rule: config.rule,
        bandwidth: config.bandwidth,
        delta_points: config.deltas.len(),
        cells,
        warnings: partition.warnings,
    };
    let path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

fn summarize_cell(index: usize, cell: &Cell, config: &PipelineConfig, out_dir: &Path) -> Result<CellSummary> {
    let mut summary = CellSummary {
        index,
        label: cell.label.clone(),
        n0: cell.n0(),
        n1: cell.n1(),
        p1_hat: cell.p1_hat(),
        skipped: None,
        files: Vec::new(),
        breakdowns: Vec::new(),
    };
    if cell.n0() == 0 || cell.n1() == 0 {
        summary.skipped = Some("one treatment arm is empty".into());
        return Ok(summary);
    }
    for &kind in &config.kinds {
        let res = estimate_sensitivity_curve(cell, kind, &config.deltas, &config.params, config.bandwidth)?;
        for (curve, param) in res.curves.iter().zip(&config.params) {
            let name = format!("cell{index}_{}_{}.csv", param.slug(), kind.label());
            curve.write_csv(&out_dir.join(&name))?;
            summary.files.push(name);
        }
        summary.breakdowns.extend(res.breakdowns);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_parsing() {
        assert_eq!("catt".parse::<Param>().unwrap(), Param::Catt);
        assert_eq!("CQTT(0.25)".parse::<Param>().unwrap(), Param::Cqtt(0.25));
        assert_eq!("cqtt:0.9".parse::<Param>().unwrap(), Param::Cqtt(0.9));
        assert!("CQTT(1.5)".parse::<Param>().is_err());
        assert_eq!(Param::Cqtt(0.5).to_string(), "CQTT(0.5)");
    }

    #[test]
    fn default_grid() {
        let g = default_delta_grid();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[100]), (0.0, 0.5));
    }
}
