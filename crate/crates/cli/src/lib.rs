//! Scenario driver for multiregional economic and emissions impacts of
//! offshore wind projects.
//!
//! The binary is a thin wrapper; everything it does is reachable from here so
//! the stages can be exercised in tests.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod readers;

pub use config::Config;
pub use output::OutputSet;
pub use pipeline::Failure;
