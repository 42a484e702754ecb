//! Instance generation, experiment specs, metrics and sweeps.

mod experiment;
mod generate;

pub use experiment::{
    read_rows, run_experiment, run_on_instance, sweep, write_rows, write_sweep, Algorithm, ConstantOverrides,
    ExperimentOutput, ExperimentSpec, InstanceSource, MetricsRow, OracleSpec, SeedOutcome, SweepRow,
};
pub use generate::{generate_instance, GenSpec, BOUNDARY_MARGIN, MAX_TRIES};
