//! Experiment configuration, the mission loop and multi-run comparisons.

mod compare;
mod config;
mod mission;

pub use compare::{compare_runs, ComparisonRow, ModeSpec, BIAS_WEIGHT};
pub use config::{Experiment, ExperimentConfig};
pub use mission::{run_mission, Mission, MissionSummary};
