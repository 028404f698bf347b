//! Probabilistic volumetric-semantic map: occupancy log-odds and class
//! distributions per voxel, stored in a bounded octree.

mod dump;
mod fusion;
mod octree;
mod params;
mod raycast;
mod sensor_model;

pub use dump::{read_dump, write_dump, DumpHeader, DumpRecord};
pub use fusion::{integrate_scan, FusionStats};
pub use octree::{floor_simplex, occupancy_entropy, plogp, OctreeMap, SemanticVoxel};
pub use params::{logistic, logit, MapParams, OccupancyEntropy, VoxelKey};
pub use raycast::{clip_to_bounds, raycast_traverse, GridWalker};
pub use sensor_model::{axial_sigma, endpoint_hit_probability, MAX_HIT_PROBABILITY};

pub(crate) use octree::argmax;
