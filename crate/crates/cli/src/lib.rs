//! Run configurations, CSV artifacts and the pipeline behind the `gch`
//! command-line tool.

pub mod check;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod run;

pub use check::{check_run, CheckReport};
pub use config::RunConfig;
pub use error::CliError;
pub use manifest::Manifest;
pub use run::{output_root, run_experiment, Command, Run};
