//! Image files, the weight file format and the `rfdn` command-line tool
//! built on `rfdn-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod runconfig;
pub mod weightfile;

pub use error::{CliError, Result};
