use crate::error::Result;
use crate::geometry::{Pose, Vec3};
use crate::sensor::SemanticPointCloud;

use super::octree::OctreeMap;
use super::params::logit;
use super::raycast::{clip_to_bounds, GridWalker};
use super::sensor_model::{endpoint_hit_probability, MAX_HIT_PROBABILITY};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FusionStats {
    pub hit_updates: usize,
    pub free_updates: usize,
    /// Points whose endpoint fell outside the map; only their free-space part
    /// was integrated.
    pub clipped_points: usize,
}

/// Fuses one semantic point cloud taken from `pose`.
///
/// For each point, every voxel crossed on the way to the endpoint receives a
/// `p_free` update; the endpoint voxel receives the range-dependent hit
/// probability and the point's class distribution. Points are processed in
/// cloud order. `axial_scale == 0` models a noiseless sensor whose endpoint
/// likelihood saturates.
pub fn integrate_scan(
    map: &mut OctreeMap,
    pose: &Pose,
    cloud: &SemanticPointCloud,
    axial_scale: f64,
) -> Result<FusionStats> {
    let origin = pose.pos();
    map.params().key_of(&origin)?;
    let (sin, cos) = pose.yaw.sin_cos();
    let free_delta = logit(map.params().p_free);
    let resolution = map.params().resolution;
    let mut stats = FusionStats::default();

    for point in &cloud.points {
        let p = &point.position;
        let world = origin + Vec3::new(cos * p.x - sin * p.y, sin * p.x + cos * p.y, p.z);
        let dir = world - origin;
        let end_key = map.params().key_of(&world).ok();

        if let Some((t0, t1)) = clip_to_bounds(map.params(), &origin, &dir) {
            let walker = GridWalker::new(map.params(), &origin, &dir, t0, t1);
            for key in walker.filter(|k| Some(*k) != end_key) {
                map.add_log_odds(key, free_delta)?;
                stats.free_updates += 1;
            }
        }

        match end_key {
            Some(key) => {
                let p_hit = if axial_scale > 0.0 {
                    endpoint_hit_probability(point.range, axial_scale, resolution)?
                } else {
                    MAX_HIT_PROBABILITY
                };
                map.update_occupancy(key, p_hit)?;
                map.update_semantics(key, &point.class_probs)?;
                stats.hit_updates += 1;
            }
            None => stats.clipped_points += 1,
        }
    }
    Ok(stats)
}
