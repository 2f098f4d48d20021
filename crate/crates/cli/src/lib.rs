//! Command-line front end: instance files and subcommands.

pub mod commands;
pub mod format;

pub use commands::execute;
