//! Parameter sweeps over the extended Hubbard chain and their tabular output.

mod config;
mod output;
mod sweep;

pub use config::{linear_grid, ExperimentConfig};
pub use output::{
    emit_results, exit_code, read_csv, read_json, summary, write_atomic, write_csv, write_json, Emitted, CSV_COLUMNS,
    JSON_SCHEMA,
};
pub use sweep::{
    analyze_crossing, fit_line, mean_abs_error, run_fig1_sweep, run_fig2_sweep, run_scaling_benchmark,
    CrossingAnalysis, PointStatus, ScalingReport, ScalingRow, SweepPoint, SweepResult,
};
