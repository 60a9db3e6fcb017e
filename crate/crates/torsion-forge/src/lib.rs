//! Front end for `torsion-forge`: input parsing, commands and report rendering.

pub mod canonical;
pub mod commands;
pub mod error;
pub mod input;
pub mod text;

pub use error::CliError;
