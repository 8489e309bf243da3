//! Experiment harness around the `mauplink` library: configuration files,
//! span and antenna-count sweeps, single runs, gradient checks and result files.

pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod output;
pub mod spec;

pub use error::{CliError, Result};
pub use experiment::{
    run_eval, run_single, run_sweep, run_sweep_antennas, run_sweep_span, ResultRow, SingleRun,
};
pub use gradcheck::{run_grad_check, GradCheckReport};
pub use spec::{ExperimentSpec, Layout, SweepKind};
