//! Configuration-driven experiments behind the command-line tool: figure
//! reproductions, random-game sweeps and stability reports. Outputs are
//! plain CSV and JSON for external plotting.

mod commands;
mod config;
mod presets;

pub use commands::{
    cmd_run, cmd_stability, cmd_sweep, sweep_rows, MethodSummary, RunSummary, SweepRow,
    SweepSummary, SWEEP_HEADER,
};
pub use config::{load_json, ExperimentConfig, GameSpec, InitSpec, StabilityConfig, SweepConfig};
pub use presets::{preset, Preset, PRESET_NAMES};
