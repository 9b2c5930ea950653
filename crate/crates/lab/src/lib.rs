//! The `nls-lab` runner around `nls-gibbs-core`. Config parsing and CSV/JSON
//! output live here, next to the acceptance gate.

pub mod acceptance;
pub mod cli;
pub mod commands;
pub mod config;
pub mod exec;
pub mod manifest;
pub mod output;
