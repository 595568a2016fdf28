use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outcome `y`, binary treatment `x` and numeric covariates `w` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    outcome: String,
    treatment: String,
    covariates: Vec<String>,
    y: Vec<f64>,
    x: Vec<u8>,
    w: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        outcome: impl Into<String>,
        treatment: impl Into<String>,
        covariates: Vec<String>,
        y: Vec<f64>,
        x: Vec<u8>,
        w: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if y.len() != x.len() || w.len() != y.len() {
            return Err(Error::domain(format!(
                "column lengths differ: {} outcomes, {} treatments, {} covariate rows",
                y.len(),
                x.len(),
                w.len()
            )));
        }
        if let Some(i) = x.iter().position(|&v| v > 1) {
            return Err(Error::Data { row: i + 1, msg: format!("treatment value {} is not 0 or 1", x[i]) });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data { row: i + 1, msg: format!("outcome {} is not finite", y[i]) });
        }
        if let Some(i) = w.iter().position(|r| r.len() != covariates.len()) {
            return Err(Error::Data {
                row: i + 1,
                msg: format!("{} covariate values for {} covariates", w[i].len(), covariates.len()),
            });
        }
        Ok(Dataset {
            outcome: outcome.into(),
            treatment: treatment.into(),
            covariates,
            y,
            x,
            w,
        })
    }

    /// Outcome and treatment only, with columns named `y` and `x`.
    pub fn from_pairs(y: Vec<f64>, x: Vec<u8>) -> Result<Self> {
        let n = y.len();
        Self::new("y", "x", Vec::new(), y, x, vec![Vec::new(); n])
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome
    }

    pub fn treatment_name(&self) -> &str {
        &self.treatment
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariates
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    pub fn treatments(&self) -> &[u8] {
        &self.x
    }

    /// Covariate values of row `i`.
    pub fn covariates(&self, i: usize) -> &[f64] {
        &self.w[i]
    }

    /// Outcomes of the rows with treatment `arm`.
    pub fn arm(&self, arm: u8) -> Vec<f64> {
        self.y.iter().zip(&self.x).filter(|(_, &x)| x == arm).map(|(y, _)| *y).collect()
    }

    /// Writes a header row and one line per observation. Numbers use the
    /// shortest representation that parses back to the same value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec![self.outcome.as_str(), self.treatment.as_str()];
        header.extend(self.covariates.iter().map(String::as_str));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.y[i].to_string(), self.x[i].to_string()];
            rec.extend(self.w[i].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    pub outcome: String,
    pub treatment: String,
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub filters: Vec<Filter>,
}

impl IngestConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Keeps rows where `col op val` holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Filter {
    pub col: String,
    pub op: FilterOp,
    pub val: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterOp {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl FilterOp {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            FilterOp::Gt => lhs > rhs,
            FilterOp::Ge => lhs >= rhs,
            FilterOp::Lt => lhs < rhs,
            FilterOp::Le => lhs <= rhs,
            FilterOp::Eq => lhs == rhs,
            FilterOp::Ne => lhs != rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    /// Rows with a missing or unparsable outcome, treatment or covariate.
    pub dropped_missing: usize,
    pub dropped_by_filter: usize,
}

impl IngestReport {
    pub fn drops(&self) -> usize {
        self.dropped_missing + self.dropped_by_filter
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a CSV with a header row, keeping the mapped columns. Rows with a
/// missing value or failing a filter are dropped and counted; a treatment
/// value other than 0 or 1 is an error.
pub fn ingest_csv(path: &Path, config: &IngestConfig) -> Result<(Dataset, IngestReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, config)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, config: &IngestConfig) -> Result<(Dataset, IngestReport)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();
    let col = |name: &str| header.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_string()));
    let yi = col(&config.outcome)?;
    let xi = col(&config.treatment)?;
    let wi = config.covariates.iter().map(|c| col(c)).collect::<Result<Vec<_>>>()?;
    let fi = config.filters.iter().map(|f| col(&f.col)).collect::<Result<Vec<_>>>()?;

    let mut report = IngestReport::default();
    let (mut y, mut x, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 1;
        report.rows_read += 1;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let passes = config
            .filters
            .iter()
            .zip(&fi)
            .all(|(f, &i)| parse_cell(field(i)).is_some_and(|v| f.op.holds(v, f.val)));
        if !passes {
            report.dropped_by_filter += 1;
            continue;
        }
        let treat = match parse_cell(field(xi)) {
            None => {
                report.dropped_missing += 1;
                continue;
            }
            Some(0.0) => 0u8,
            Some(1.0) => 1u8,
            Some(_) => {
                return Err(Error::Data {
                    row,
                    msg: format!("treatment `{}` is {:?}, expected 0 or 1", config.treatment, field(xi)),
                })
            }
        };
        let (Some(outcome), Some(covs)) = (parse_cell(field(yi)), wi.iter().map(|&i| parse_cell(field(i))).collect::<Option<Vec<_>>>())
        else {
            report.dropped_missing += 1;
            continue;
        };
        y.push(outcome);
        x.push(treat);
        w.push(covs);
    }
    report.rows_kept = y.len();
    let ds = Dataset::new(config.outcome.clone(), config.treatment.clone(), config.covariates.clone(), y, x, w)?;
    Ok((ds, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> IngestConfig {
        IngestConfig::from_json(r#"{"outcome":"y","treatment":"x","covariates":["age"]}"#).unwrap()
    }

    #[test]
    fn missing_outcome_is_dropped() {
        let text = "y,x,age\n1.5,1,30\n,0,31\n2.0,0,45\n0.5,1,22\n";
        let (ds, rep) = ingest_reader(text.as_bytes(), &config()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(rep.drops(), 1);
        assert_eq!(rep.rows_read, 4);
    }

    #[test]
    fn non_binary_treatment_names_row() {
        let text = "y,x,age\n1.5,1,30\n1.0,2,31\n";
        let err = ingest_reader(text.as_bytes(), &config()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn missing_column_is_reported() {
        let err = ingest_reader("y,t\n1,0\n".as_bytes(), &config()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "x"));
    }

    #[test]
    fn filters_drop_rows() {
        let cfg = IngestConfig::from_json(
            r#"{"outcome":"y","treatment":"x","filters":[{"col":"wage","op":">","val":0}]}"#,
        )
        .unwrap();
        let text = "y,x,wage\n1,1,10\n2,0,0\n3,0,\n4,1,5\n";
        let (ds, rep) = ingest_reader(text.as_bytes(), &cfg).unwrap();
        assert_eq!(ds.outcomes(), &[1.0, 4.0]);
        assert_eq!(rep.dropped_by_filter, 2);
    }
}
