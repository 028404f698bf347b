//! Incremental voxel traversal along a segment (Amanatides & Woo stepping).

use crate::geometry::Vec3;

use super::params::{MapParams, VoxelKey};

/// Walks the grid cells crossed by `origin + t * dir` for `t` in
/// `[t_start, t_end)`, one O(1) step per cell.
///
/// The walk stops early when it leaves the grid.
pub struct GridWalker {
    cell: [i64; 3],
    dims: [i64; 3],
    step: [i64; 3],
    t_next: [f64; 3],
    t_delta: [f64; 3],
    t_end: f64,
    remaining: usize,
    done: bool,
}

impl GridWalker {
    /// `origin + t_start * dir` must lie inside (or on the boundary of) the
    /// grid bounds; it is clamped to the nearest cell otherwise.
    pub fn new(params: &MapParams, origin: &Vec3, dir: &Vec3, t_start: f64, t_end: f64) -> Self {
        let dims = params.dims().map(|d| d as i64);
        let inv_res = 1.0 / params.resolution;
        let start = origin + dir * t_start;
        let mut cell = [0i64; 3];
        let mut step = [0i64; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for i in 0..3 {
            let g = (start[i] - params.bounds.min[i]) * inv_res;
            cell[i] = (g.floor() as i64).clamp(0, dims[i] - 1);
            let d = dir[i] * inv_res;
            if d > 0.0 {
                step[i] = 1;
                t_delta[i] = 1.0 / d;
                t_next[i] = t_start + ((cell[i] + 1) as f64 - g) / d;
            } else if d < 0.0 {
                step[i] = -1;
                t_delta[i] = -1.0 / d;
                t_next[i] = t_start + (cell[i] as f64 - g) / d;
            }
        }
        let remaining = (dims[0] + dims[1] + dims[2] + 3) as usize;
        Self {
            cell,
            dims,
            step,
            t_next,
            t_delta,
            t_end,
            remaining,
            done: !(t_end > t_start),
        }
    }
}

impl Iterator for GridWalker {
    type Item = VoxelKey;

    fn next(&mut self) -> Option<VoxelKey> {
        if self.done || self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let key = VoxelKey::new(self.cell[0] as u32, self.cell[1] as u32, self.cell[2] as u32);

        let axis = if self.t_next[0] <= self.t_next[1] {
            if self.t_next[0] <= self.t_next[2] {
                0
            } else {
                2
            }
        } else if self.t_next[1] <= self.t_next[2] {
            1
        } else {
            2
        };
        if self.t_next[axis] >= self.t_end {
            self.done = true;
        } else {
            self.cell[axis] += self.step[axis];
            self.t_next[axis] += self.t_delta[axis];
            if self.cell[axis] < 0 || self.cell[axis] >= self.dims[axis] {
                self.done = true;
            }
        }
        Some(key)
    }
}

/// Parametric interval of `origin + t * dir`, `t` in `[0, 1]`, that lies in
/// the map bounds.
pub fn clip_to_bounds(params: &MapParams, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
    let (t0, t1) = params.bounds.ray_interval(origin, dir)?;
    let (t0, t1) = (t0.max(0.0), t1.min(1.0));
    (t0 <= t1).then_some((t0, t1))
}

/// Ordered voxels crossed by the segment from `origin` to `endpoint`,
/// excluding the voxel that contains `endpoint`.
///
/// Portions of the segment outside the map bounds are clipped away. When the
/// endpoint itself lies outside the bounds every crossed in-bounds voxel is
/// returned.
pub fn raycast_traverse(origin: &Vec3, endpoint: &Vec3, params: &MapParams) -> Vec<VoxelKey> {
    let dir = endpoint - origin;
    if dir.norm_squared() == 0.0 {
        return Vec::new();
    }
    let Some((t0, t1)) = clip_to_bounds(params, origin, &dir) else {
        return Vec::new();
    };
    let end_key = params.key_of(endpoint).ok();
    GridWalker::new(params, origin, &dir, t0, t1)
        .filter(|k| Some(*k) != end_key)
        .collect()
}
