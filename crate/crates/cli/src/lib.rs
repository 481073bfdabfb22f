//! Command-line front end: scenario files, CSV formats and the `simulate`,
//! `replay` and `diagnose` commands.

pub mod commands;
pub mod csvio;
pub mod error;
pub mod schema;

pub use error::{exit, CliError};
