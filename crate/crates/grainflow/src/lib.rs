//! File formats, synthetic benchmark files and the driver behind the
//! `grainflow` command-line tool.
//!
//! All algorithms live in [`grainflow_core`]; this crate reads and writes the
//! CSV layouts, parses generator configs and runs comparison folds in parallel.

pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod synth_config;

pub use error::{Error, Result};
pub use grainflow_core as core;
