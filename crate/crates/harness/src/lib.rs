//! Configuration, seeded replication and output files for the `mints` CLI.
//!
//! A run writes three files under its output directory:
//!
//! * `rounds.jsonl`: a header line `{schema_version, family, policy,
//!   config_hash, env_hash, seed, replications, rounds}`, then one record
//!   `{rep, t, x, phi, regret, cum_regret, posterior_entropy}` per round.
//! * `summary.csv`: one row per replication with `R(t)` at the checkpoints
//!   `{T/8, T/4, T/2, T}` and pull counts.
//! * `trace.csv`: mean and standard error of `R(t)` per checkpoint.

pub mod aggregate;
pub mod config;
pub mod run;

pub use aggregate::{aggregate, aggregate_dirs, log_fit, AggregateRow, LogFit};
pub use config::{load_config, parse_config, parse_config_for, ConfigError, ExperimentConfig, Family, Params, Policy};
pub use run::{run_experiment, run_replication, run_replications, RepOutcome, RunError, RunSummary};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const RUNTIME: i32 = 3;
}
