//! Configuration, orchestration and report emission for the `rns` binary.

pub mod commands;
pub mod config;
pub mod output;
