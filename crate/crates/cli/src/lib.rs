//! Library side of the experiment CLI: configs, drivers, and writers.

pub mod config;
pub mod experiment;
pub mod output;
