//! Library surface of the verification front end: config loading, check
//! execution, and report emission. The `pmcv` binary is a thin wrapper.

pub mod config;
pub mod report;
pub mod runner;
