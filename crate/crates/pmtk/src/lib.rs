//! Configuration-driven front end for `pmtk-core`: experiment files,
//! pipelines with named verdict rules, run records and convergence tables.

pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod record;
pub mod report;
pub mod run;
pub mod table;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use record::{RunRecord, Status};
pub use run::{run, RunOutput};
