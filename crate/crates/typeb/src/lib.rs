//! Command-line driver for `typeb-core`: argument parsing, reproducible run
//! manifests, CSV and JSON output, and a thread pool for independent rows.
//!
//! The binary is a thin wrapper around [`cli::run`], which is also what the
//! integration tests drive.

pub mod cli;
pub mod manifest;
pub mod output;
pub mod parallel;
