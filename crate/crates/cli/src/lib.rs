//! Command-line front end: config files, subcommands and output files.

pub mod commands;
pub mod config;
pub mod manifest;
