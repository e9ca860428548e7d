//! Experiment orchestration: configuration, the staged-cancellation
//! experiments, measurement, reports and the built-in invariant suite.

pub mod config;
pub mod experiments;
pub mod measure;
pub mod report;
pub mod selftest;

pub use config::ExperimentConfig;
pub use experiments::{
    front_end, run_combined_showcase, run_dsic_showcase, run_rfsic_showcase, run_sweep, tune_rfsic,
    ExperimentOutput, SweepOutput, SweepRow,
};
pub use measure::{band_power_db, measure_power, psd_estimate, PsdBin};
pub use report::{CancellationReport, Stage};
pub use selftest::{run_selftest, CheckResult};
