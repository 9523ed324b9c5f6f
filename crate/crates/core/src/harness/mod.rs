//! Experiment orchestration: configuration, statistics, result tables.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod stats;
pub mod table;
