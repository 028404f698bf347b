//! Probabilistic volumetric-semantic mapping and information-driven
//! exploration.
//!
//! A simulated depth camera with per-pixel class scores observes a world of
//! labeled boxes. Scans are fused into an octree holding occupancy log-odds
//! and a class distribution per voxel, and a receding-horizon RRT picks the
//! next view by maximizing one of three information-gain formulations.

pub mod error;
pub mod geometry;
pub mod map;
pub mod metrics;
pub mod planner;
pub mod runner;
pub mod sensor;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{Aabb, Pose, Vec3};
