//! Command-line front end for `cosetlab-core`: configuration, the five
//! commands and their CSV/JSON artifacts.

pub mod config;
pub mod run;
pub mod recipes;

pub use config::{Cli, Command, Format, Options, RunConfig};
pub use run::{exit_code, run, RunOutput};
