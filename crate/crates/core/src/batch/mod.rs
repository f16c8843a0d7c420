//! Batch front end: a small configuration format, a catalog of built-in
//! problems, and a pipeline that solves, checks invariance, evaluates the
//! conserved quantity and writes CSV data plus a report.

mod catalog;
mod config;
mod format;
mod run;

pub use catalog::{catalog, catalog_entry, CatalogEntry};
pub use config::{
    ConfigError, Constant, DelayConfig, GeneratorConfig, ProblemConfig, ToleranceConfig,
};
pub use format::fmt_g12;
pub use run::{
    build_problem, conserved_csv, extremal_csv, run_config, run_file, ConservationSummary,
    FailedFit, InvarianceSummary, RunError, RunOptions, RunReport, SolveSummary, Stage,
    StageVerdict, VariantCheck, EXIT_ERROR, EXIT_OK, EXIT_VERDICT,
};
