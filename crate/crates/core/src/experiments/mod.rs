//! Benchmark targets, configuration, the scaling harness and result files.

pub mod config;
pub mod fit;
pub mod harness;
pub mod output;
pub mod targets;

pub use config::{ExperimentConfig, Method, Task};
pub use fit::{fit_loglog, gm_bound, LogLogFit};
pub use harness::{run_scaling, ScalingResult, ScalingRow, TrialMetrics};
pub use output::{emit_results, read_csv, read_json, write_csv, write_json, CsvRow, OutputFormat};
pub use targets::{builtin_target, resolve_target, Target, TARGET_NAMES};
