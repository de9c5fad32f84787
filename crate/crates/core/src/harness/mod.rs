//! Monte Carlo estimation, experiment sweeps, analysis reports and the
//! verification suite.

mod config;
mod estimate;
mod report;
mod verify;

pub use config::{run_sweep, ExperimentConfig};
pub use estimate::{
    attach_oracles, mc_estimate, oracle_cells, read_csv, run_trials, write_csv, EllLabel, EstimateRow, McOptions,
    OracleCell, Tally, CSV_HEADER, MAX_ORACLE_DIM,
};
pub use report::{analyze, AnalysisReport, FEllSize};
pub use verify::{verify, CheckResult, Level, VerifyOptions, VerifyReport, INVARIANTS, META_CHECK};
