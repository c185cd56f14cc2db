//! Closed-loop exploration: robot kinematics, the mapping and roadmap loops, world generation,
//! ground-truth coverage and run artifacts.

mod config;
mod metrics;
mod oracle;
mod robot;
mod run;
mod worldgen;

pub use config::{RobotConfig, RunConfig};
pub use metrics::{metrics_csv, CycleDiagnostics, CycleRecord, PlanTrace, RunResult, StopReason, Summary, CSV_HEADER};
pub use oracle::{admissible_positions, compute_ground_truth_coverage, CoverageOracle, ORACLE_HEADINGS};
pub use robot::{Robot, StepEvent};
pub use run::{load_world, run_exploration, RunOutcome};
pub use worldgen::{generate_world, WorldKind, WorldParams};
