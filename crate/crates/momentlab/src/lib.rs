//! File formats and the `momentlab` command line on top of
//! [`momentlab_core`].

pub mod artifact;
pub mod cli;
pub mod error;
pub mod format;
pub mod parse;
pub mod verify;

pub use error::{CliError, CliResult};
