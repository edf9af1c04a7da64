//! Batch scoring, dataset IO, sentence encoders and reports for measuring
//! how faithfully, in what order, and how progressively a reasoning trace
//! covers a problem's weighted ground-truth nexuses.
//!
//! The metric and selection math lives in [`logicality_core`]; this crate
//! adds files, encoders, parallel batch runs and the `logicality` CLI.

pub mod cli;
pub mod dataset;
pub mod encoders;
pub mod error;
pub mod fsio;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use logicality_core as core;
