//! Runner, file formats and command line for `mixing-core`.
//!
//! A run is described by a strict JSON [`config::RunConfig`]. [`runner::run_command`]
//! dispatches it to the core kernels, writes CSV artifacts atomically and
//! finishes with `summary.json`, whose criteria decide the exit status.

pub mod config;
pub mod fft;
pub mod io;
pub mod parallel;
pub mod report;
pub mod runner;

pub use config::{parse_config, Command, RunConfig};
pub use report::{Criterion, RunReport, Status};
pub use runner::{output_dir, run_command};
