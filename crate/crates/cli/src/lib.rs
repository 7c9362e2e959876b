//! Scenario files and the runner behind the `resonance-lab` binary.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{parse_config, ConfigError, ScenarioConfig, ScenarioKind};
pub use run::{run_scenario, RunError, RunOutcome};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const NUMERIC: i32 = 2;
}

/// Environment variable capping the worker threads of parallel sweeps.
pub const THREADS_ENV: &str = "RESONANCE_LAB_THREADS";
