//! Command line front end, file formats and the acceptance harness for
//! `sardkit-core`.

pub mod cli;
pub mod commands;
pub mod formats;
pub mod verify;

pub use commands::{CliError, Common};
pub use formats::{Meta, VERSION};
