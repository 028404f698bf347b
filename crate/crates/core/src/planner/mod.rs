//! Receding-horizon RRT next-best-view planner with pluggable per-voxel
//! information gain.

mod gain;
mod params;
mod rrt;
mod visibility;

pub use gain::{node_gain, voxel_gain};
pub use params::{GainMode, PlannerParams};
pub use rrt::{best_node, build_tree, first_step, plan_step, view_gain, PlanOutcome, PlanReport, RrtNode};
pub use visibility::{clearance, collision_free, visible_set, voxel_in_frustum, VisibleVoxel};
