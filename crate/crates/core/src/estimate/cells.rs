use std::collections::HashMap;

use serde::Serialize;

use super::Dataset;
use crate::{Error, Result};

const MANY_LEVELS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellRule {
    /// Each covariate becomes `1(value > sample median)`.
    MedianSplit,
    /// Each distinct combination of covariate values is a cell.
    ExactLevels,
}

impl std::str::FromStr for CellRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median-split" => Ok(CellRule::MedianSplit),
            "exact-levels" => Ok(CellRule::ExactLevels),
            _ => Err(Error::domain(format!("unknown cell rule `{s}` (expected median-split or exact-levels)"))),
        }
    }
}

/// One covariate cell with the outcomes of each arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    /// `name=level` pairs joined by commas; `all` without covariates.
    pub label: String,
    pub key: Vec<f64>,
    #[serde(skip)]
    pub y0: Vec<f64>,
    #[serde(skip)]
    pub y1: Vec<f64>,
}

impl Cell {
    pub fn n0(&self) -> usize {
        self.y0.len()
    }

    pub fn n1(&self) -> usize {
        self.y1.len()
    }

    /// Sample treatment share `n1 / (n0 + n1)`.
    pub fn p1_hat(&self) -> f64 {
        self.n1() as f64 / (self.n0() + self.n1()) as f64
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub cells: Vec<Cell>,
    pub warnings: Vec<String>,
}

/// Sample median, averaging the two middle values for even sizes.
pub fn sample_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// Covariate values, arm-0 outcomes, arm-1 outcomes.
type Group = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Splits the dataset into covariate cells, ordered by key. Empty cells are
/// omitted with a warning.
pub fn cell_partition(ds: &Dataset, covariates: &[String], rule: CellRule) -> Result<Partition> {
    let cols = covariates
        .iter()
        .map(|c| {
            ds.covariate_names()
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::MissingColumn(c.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    if ds.is_empty() {
        return Err(Error::domain("dataset has no rows"));
    }
    let column = |j: usize| (0..ds.len()).map(|i| ds.covariates(i)[j]).collect::<Vec<f64>>();
    let mut warnings = Vec::new();
    let keys: Vec<Vec<f64>> = match rule {
        CellRule::MedianSplit => {
            let medians: Vec<f64> = cols.iter().map(|&j| sample_median(&column(j))).collect();
            (0..ds.len())
                .map(|i| {
                    cols.iter()
                        .zip(&medians)
                        .map(|(&j, m)| if ds.covariates(i)[j] > *m { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect()
        }
        CellRule::ExactLevels => {
            for (&j, name) in cols.iter().zip(covariates) {
                let mut levels = column(j);
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                if levels.len() > MANY_LEVELS {
                    warnings.push(format!(
                        "covariate `{name}` has {} distinct values; cells will be sparse, consider median-split",
                        levels.len()
                    ));
                }
            }
            (0..ds.len()).map(|i| cols.iter().map(|&j| ds.covariates(i)[j]).collect()).collect()
        }
    };

    let mut groups: HashMap<Vec<u64>, Group> = HashMap::new();
    for (i, key) in keys.into_iter().enumerate() {
        let bits = key.iter().map(|v| v.to_bits()).collect();
        let entry = groups.entry(bits).or_insert_with(|| (key, Vec::new(), Vec::new()));
        if ds.treatments()[i] == 1 {
            entry.2.push(ds.outcomes()[i]);
        } else {
            entry.1.push(ds.outcomes()[i]);
        }
    }
    let mut cells: Vec<Cell> = groups
        .into_values()
        .map(|(key, y0, y1)| Cell {
            label: label(covariates, &key),
            key,
            y0,
            y1,
        })
        .collect();
    cells.sort_by(|a, b| {
        a.key
            .iter()
            .zip(&b.key)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    if rule == CellRule::MedianSplit {
        let expected = 1usize << cols.len().min(20);
        if cells.len() < expected {
            warnings.push(format!("{} of {expected} median-split cells are empty and omitted", expected - cells.len()));
        }
    }
    for c in &cells {
        if c.y0.is_empty() || c.y1.is_empty() {
            warnings.push(format!("cell {} has an empty treatment arm", c.label));
        }
    }
    Ok(Partition { cells, warnings })
}

fn label(names: &[String], key: &[f64]) -> String {
    if names.is_empty() {
        return "all".to_string();
    }
    names
        .iter()
        .zip(key)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}
