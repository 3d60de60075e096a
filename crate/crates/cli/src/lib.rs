//! Configuration, commands and output formats behind the `chunktune` binary.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    cmd_bench, cmd_migrate, cmd_model, cmd_tune, cmd_tune_with, cmd_validate, BenchRecord,
    MigrateOutput, ModelOutput, ValidationReport,
};
pub use config::{RunConfig, SchedulerKind, VelocityKind};
pub use error::CliError;
