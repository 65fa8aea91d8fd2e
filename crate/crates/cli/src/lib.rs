//! Library side of the `ichan` command-line tool.

pub mod commands;
pub mod error;
pub mod records;
pub mod track;
pub mod validate;

pub use error::{CliError, Result};
