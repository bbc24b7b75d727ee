//! File formats, persistence, and command plumbing for the `relabel` CLI.
//!
//! The algorithms live in `relabel-core`; this crate reads and writes the
//! text formats (state snapshots, prediction CSV/JSONL, confusion CSV,
//! metrics and summary CSV, scenario files) and wires them to the core
//! operations.

#![forbid(unsafe_code)]

pub mod commands;
pub mod error;
pub mod formats;
pub mod report;
pub mod scenario;
pub mod state;

pub use error::{CliError, CliResult};
