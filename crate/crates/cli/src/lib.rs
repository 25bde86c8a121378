//! Command-line front end: configuration, subcommands and the dense oracle
//! cross-check.

pub mod args;
pub mod commands;
pub mod config;
pub mod oracle_check;
