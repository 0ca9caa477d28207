//! Library surface of the experiment runner, shared by the binary and the
//! acceptance suite.

pub mod config;
pub mod rank;
pub mod runner;

pub use config::RunConfig;
pub use runner::{bench_daily, run_experiment, Cell, CellRecord, RunOutput};
