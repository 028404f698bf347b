use crate::geometry::{point_segment_distance, Aabb, Pose, Vec3};
use crate::map::{clip_to_bounds, logit, GridWalker, OctreeMap, VoxelKey};
use crate::world::CameraModel;

/// A voxel seen from a candidate view. `terminal` marks the occupied voxel
/// where the ray stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisibleVoxel {
    pub key: VoxelKey,
    pub terminal: bool,
}

/// Voxels seen from `pose` through the ray grid of `camera`.
///
/// Each ray marches cell by cell up to `camera.max_range` or the map limit,
/// keeping every crossed voxel. A ray stops at the first voxel whose
/// occupancy exceeds `occupied_threshold`; that voxel is kept and flagged
/// terminal. Each voxel is reported once, in first-seen order.
pub fn visible_set(
    map: &OctreeMap,
    pose: &Pose,
    camera: &CameraModel,
    occupied_threshold: f64,
) -> Vec<VisibleVoxel> {
    let mut out = Vec::new();
    for_each_visible(map, pose, camera, occupied_threshold, |v| out.push(v));
    out
}

pub(crate) fn for_each_visible(
    map: &OctreeMap,
    pose: &Pose,
    camera: &CameraModel,
    occupied_threshold: f64,
    mut visit: impl FnMut(VisibleVoxel),
) {
    let params = map.params();
    let origin = pose.pos();
    if !params.contains_point(&origin) {
        return;
    }
    let dims = params.dims();
    let index = |k: VoxelKey| (k.ix as usize * dims[1] as usize + k.iy as usize) * dims[2] as usize + k.iz as usize;
    let mut seen = vec![false; params.voxel_count()];
    let blocking = logit(occupied_threshold);

    for (az, el) in camera.ray_angles() {
        let dir = pose.ray_direction(az, el) * camera.max_range;
        let Some((t0, t1)) = clip_to_bounds(params, &origin, &dir) else {
            continue;
        };
        for key in GridWalker::new(params, &origin, &dir, t0, t1) {
            let terminal = map.log_odds(key) > blocking;
            let i = index(key);
            if !seen[i] {
                seen[i] = true;
                visit(VisibleVoxel { key, terminal });
            }
            if terminal {
                break;
            }
        }
    }
}

/// True iff the straight motion `from -> to` keeps clear of known-occupied
/// voxels: no voxel crossed by the segment, and no voxel whose center lies
/// within `radius` of it, has occupancy above `occupied_threshold`. Unknown
/// voxels do not block. Motions leaving the map are rejected.
pub fn collision_free(
    map: &OctreeMap,
    from: &Vec3,
    to: &Vec3,
    radius: f64,
    occupied_threshold: f64,
) -> bool {
    let params = map.params();
    if !params.contains_point(from) || !params.contains_point(to) {
        return false;
    }
    let blocking = logit(occupied_threshold);
    let occupied = |k: VoxelKey| map.raw(k).is_some_and(|(l, _)| l > blocking);

    let dir = to - from;
    let swept: Box<dyn Iterator<Item = VoxelKey>> = if dir.norm_squared() > 0.0 {
        Box::new(GridWalker::new(params, from, &dir, 0.0, 1.0))
    } else {
        Box::new(params.key_of(from).into_iter())
    };
    if swept.into_iter().any(occupied) {
        return false;
    }
    if radius <= 0.0 {
        return true;
    }
    nearest_occupied(map, from, to, radius, occupied_threshold) > radius
}

/// Distance from `p` to the nearest known-occupied voxel center, or
/// `radius` when none lies within `radius`.
pub fn clearance(map: &OctreeMap, p: &Vec3, radius: f64, occupied_threshold: f64) -> f64 {
    nearest_occupied(map, p, p, radius, occupied_threshold).min(radius)
}

/// Smallest distance from the segment `a`-`b` to an occupied voxel center
/// within the `radius`-inflated bounding box; infinity when there is none.
fn nearest_occupied(map: &OctreeMap, a: &Vec3, b: &Vec3, radius: f64, occupied_threshold: f64) -> f64 {
    let params = map.params();
    let blocking = logit(occupied_threshold);
    let lo = a.inf(b).add_scalar(-radius);
    let hi = a.sup(b).add_scalar(radius);
    let dims = params.dims();
    let cell = |v: f64, i: usize| {
        (((v - params.bounds.min[i]) / params.resolution).floor() as i64).clamp(0, dims[i] as i64 - 1) as u32
    };
    let mut best = f64::INFINITY;
    for ix in cell(lo.x, 0)..=cell(hi.x, 0) {
        for iy in cell(lo.y, 1)..=cell(hi.y, 1) {
            for iz in cell(lo.z, 2)..=cell(hi.z, 2) {
                let k = VoxelKey::new(ix, iy, iz);
                if map.raw(k).is_some_and(|(l, _)| l > blocking) {
                    best = best.min(point_segment_distance(&params.center_of(k), a, b));
                }
            }
        }
    }
    best
}

/// Voxels whose cube intersects the frustum region: the test oracle for
/// `visible_set` soundness, exposed for integration tests.
pub fn voxel_in_frustum(
    map: &OctreeMap,
    key: VoxelKey,
    pose: &Pose,
    camera: &CameraModel,
    slack: f64,
) -> bool {
    let params = map.params();
    let vbox: Aabb = params.voxel_box(key);
    let origin = pose.pos();
    if vbox.distance_sq(&origin) == 0.0 {
        return true;
    }
    let c = params.center_of(key) - origin;
    let half_diag = params.resolution * 3f64.sqrt() * 0.5;
    let dist = c.norm();
    if dist - half_diag > camera.max_range {
        return false;
    }
    // angular tolerance covering the voxel's apparent half-size
    let ang_slack = (half_diag / dist).min(1.0).asin() + slack;
    let (s, co) = (-pose.yaw).sin_cos();
    let local = Vec3::new(co * c.x - s * c.y, s * c.x + co * c.y, c.z);
    let az = local.y.atan2(local.x);
    let el = (local.z / dist).asin();
    az.abs() <= camera.h_fov * 0.5 + ang_slack && el.abs() <= camera.v_fov * 0.5 + ang_slack
}
