//! File formats, run manifests and the command-line front end for the
//! MISO interference-channel precoding learner.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;

pub use error::{CliError, Result};
