//! Experiment harness for the polarmix simulator: config parsing, the
//! subcommand implementations, deterministic CSV/SVG emission, and the
//! exit-code contract.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
