//! Command-line orchestration for `jetcalc`: problem files, command dispatch
//! and JSON reports.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use commands::{check, derive, integrate_cmd, parse_init, verify_identities, IntegrateArgs, Which};
pub use error::CliError;
pub use report::Report;
pub use spec::{Builder, Problem, ProblemSpec, Settings};
