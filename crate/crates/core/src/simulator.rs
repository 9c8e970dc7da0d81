//! Experiment orchestration: configuration files, Monte Carlo runs, sweeps
//! and result files.

mod config;
mod experiment;
mod output;
mod scenario;

pub use config::{
    grid, load_config, AgentOverride, AgentsSpec, AttackSpec, ExperimentConfig, ModelSpec,
    OutputFormat, OutputSpec, SweepParameter, SweepSpec,
};
pub use experiment::{
    run_experiment, run_sweep, EmpiricalOutcome, ExperimentResult, RunSummary, SeedFinal,
    SweepPoint, SweepResult,
};
pub use output::{
    emit_results, emit_sweep, format_forged_model, summary_csv, sweep_csv, trajectory_csv,
};
pub use scenario::Scenario;
