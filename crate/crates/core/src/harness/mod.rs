//! Reproducible experiments: configuration, runners, JSONL run records and
//! CSV summaries.

mod config;
mod experiments;
mod record;
mod stats;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{
    run, run_conditional_ratio, run_expectation_check, run_limit_check, run_moment_suite, run_poisson_fit,
    run_secondmoment_scan, PoissonTv,
};
pub use record::{read_jsonl, Header, Record, Report, SampleRecord, SummaryRow, SCHEMA_VERSION};
pub use stats::{product_poisson_tv, MeanSe};
