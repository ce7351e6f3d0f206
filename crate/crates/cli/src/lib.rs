//! Command-line front end: file formats and subcommands behind the `mkcrypt` binary.

pub mod commands;
pub mod format;

pub use commands::{run, Cli};
