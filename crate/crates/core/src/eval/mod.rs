//! Dataset runs, confusion counts under unknown policies, and reports.

mod metrics;
mod report;
mod runner;

pub use metrics::{
    apply_unknown_policy, compute_metrics, f1_score, Counts, MetricsReport, UnknownPolicy,
};
pub use report::{emit_report, parse_csv_rows, write_csv_rows, BenchReport, ReportFormat, ReportRow};
pub use runner::{
    load_dataset, run_case, run_dataset, CaseOutcome, CaseResult, DatasetError, Mode, RunConfig,
    RunConfigError,
};
