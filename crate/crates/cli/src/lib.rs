//! Command-line front end: argument parsing, the constraint grammar and the
//! jobs behind each subcommand.

pub mod args;
pub mod grammar;
pub mod jobs;
