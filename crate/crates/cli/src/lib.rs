//! Library side of the `qif` command-line tool.

pub mod commands;
pub mod prior;
pub mod render;
