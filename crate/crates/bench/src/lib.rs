//! Benchmark drivers behind the `anytime-bench` binary.
//!
//! Every command returns its CSV as a string so that the binary, the tests
//! and the acceptance harness share one code path.

pub mod commands;
pub mod format;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<anytime_core::Error> for BenchError {
    fn from(e: anytime_core::Error) -> Self {
        BenchError::Config(e.to_string())
    }
}
