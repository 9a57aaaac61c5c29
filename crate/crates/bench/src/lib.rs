//! Monte-Carlo harness for the su2wahba solvers: seeded synthetic trials,
//! parallel execution with bitwise-reproducible output, summary statistics
//! and CSV/JSON emission.

pub mod config;
pub mod emit;
pub mod experiment;
pub mod sampling;

pub use config::{ConfigError, Emit, ExperimentConfig, SolverId, WeightMode};
pub use experiment::{run_experiment, run_trial, Experiment, Summary, TrialResult};
pub use sampling::{sample_trial, Trial, TrialRng};
