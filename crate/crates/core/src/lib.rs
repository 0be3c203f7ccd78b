pub mod calibration;
pub mod classifiers;
pub mod cli;
pub mod complexity;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod seed;

pub use error::{Error, Result};

/// `cperc <version>`, recorded in saved models and report headers.
pub fn tool_version() -> String {
    format!("cperc {}", env!("CARGO_PKG_VERSION"))
}
