//! Command-line front end: argument definitions and subcommand execution.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;

pub use args::Cli;
pub use commands::run;
