//! Batch front end: verification suites, covariance-decay sweeps, bound
//! calculators and the higgs checks, with CSV/SVG output.

pub mod config;
pub mod decay;
pub mod drivers;
pub mod error;
pub mod fit;
pub mod pool;
pub mod report;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::CliError;
