//! Host-side tooling for `coopsched-core`: configuration files, Monte
//! Carlo studies, dataset replay, benchmarks and output formats.

pub mod bench;
pub mod config;
mod error;
pub mod harness;
pub mod output;
pub mod replay;
pub mod sampling;
pub mod utias;
pub mod verify;

pub use error::HarnessError;
