//! Plug-in estimation of identified sets and breakdown points from data,
//! cell by cell.

mod cells;
mod data;
mod sensitivity;
mod smooth;

pub use cells::{cell_partition, sample_median, Cell, CellRule, Partition};
pub use data::{ingest_csv, ingest_reader, Dataset, Filter, FilterOp, IngestConfig, IngestReport};
pub use sensitivity::{
    default_delta_grid, delta_grid, estimate_sensitivity_curve, run_pipeline, CellFit, CellSummary, Param, ParamBreakdown,
    PipelineConfig, SensitivityResult, SensitivitySummary, DEFAULT_DELTA_POINTS,
};
pub use smooth::{silverman_bandwidth, smoothed_cdf, Bandwidth};
