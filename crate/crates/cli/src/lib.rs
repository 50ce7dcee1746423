//! Scenario runner for weighted model manifold checks.

pub mod app;
pub mod builtin;
pub mod config;
pub mod output;
pub mod scenario;
pub mod tasks;
