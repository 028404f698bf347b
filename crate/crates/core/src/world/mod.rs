//! Ground-truth world made of labeled axis-aligned boxes, used as the
//! simulation oracle for sensing and as the voxelized reference for
//! evaluation.

mod scenario;

pub use scenario::{BoxSpec, Scenario, SCENARIO_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::map::{MapParams, VoxelKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPrimitive {
    pub name: String,
    pub shape: Aabb,
    /// Zero-based index into the world's class table.
    pub class_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthWorld {
    pub bounds: Aabb,
    pub classes: Vec<String>,
    pub primitives: Vec<LabeledPrimitive>,
}

impl GroundTruthWorld {
    pub fn new(bounds: Aabb, classes: Vec<String>, primitives: Vec<LabeledPrimitive>) -> Result<Self> {
        if !bounds.is_valid() {
            return Err(Error::InvalidParams("world bounds are empty".into()));
        }
        if classes.is_empty() {
            return Err(Error::InvalidParams("class table is empty".into()));
        }
        for p in &primitives {
            if !p.shape.is_valid() {
                return Err(Error::InvalidParams(format!("box '{}' has max <= min", p.name)));
            }
            if !bounds.contains_box(&p.shape) {
                return Err(Error::InvalidParams(format!("box '{}' leaves the world bounds", p.name)));
            }
            if p.class_id >= classes.len() {
                return Err(Error::InvalidParams(format!("box '{}' has an invalid class", p.name)));
            }
        }
        Ok(Self { bounds, classes, primitives })
    }

    pub fn empty(bounds: Aabb, classes: Vec<String>) -> Self {
        Self { bounds, classes, primitives: Vec::new() }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.eq_ignore_ascii_case(name))
    }
}

/// Pinhole-free angular camera: rays on a regular azimuth/elevation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub h_fov: f64,
    pub v_fov: f64,
    pub cols: u32,
    pub rows: u32,
    pub max_range: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            h_fov: 90f64.to_radians(),
            v_fov: 60f64.to_radians(),
            cols: 64,
            rows: 48,
            max_range: 8.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        let pi = std::f64::consts::PI;
        if !(self.h_fov > 0.0 && self.h_fov < pi && self.v_fov > 0.0 && self.v_fov < pi) {
            return Err(Error::InvalidParams("fields of view must lie in (0, pi)".into()));
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(Error::InvalidParams("ray grid must be at least 1x1".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::InvalidParams("max range must be positive".into()));
        }
        Ok(())
    }

    /// Same field of view with a different ray grid and range.
    pub fn with_grid(&self, cols: u32, rows: u32, max_range: f64) -> Self {
        Self { cols, rows, max_range, ..*self }
    }

    /// `(azimuth, elevation)` offsets of every ray, row-major from the top
    /// row, left to right.
    pub fn ray_angles(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (cols, rows) = (self.cols, self.rows);
        (0..rows).flat_map(move |r| {
            let el = self.v_fov * 0.5 - (r as f64 + 0.5) * self.v_fov / rows as f64;
            (0..cols).map(move |c| {
                let az = self.h_fov * 0.5 - (c as f64 + 0.5) * self.h_fov / cols as f64;
                (az, el)
            })
        })
    }

    pub fn ray_count(&self) -> usize {
        self.cols as usize * self.rows as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub range: f64,
    pub class_id: usize,
}

/// Nearest positive intersection of a ray with any primitive within
/// `max_range`. Ties go to the primitive listed first.
pub fn ray_intersect(
    world: &GroundTruthWorld,
    origin: &Vec3,
    direction: &Vec3,
    max_range: f64,
) -> Result<Option<RayHit>> {
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("ray direction must be a unit vector".into()));
    }
    let mut best: Option<RayHit> = None;
    for prim in &world.primitives {
        let Some((t0, t1)) = prim.shape.ray_interval(origin, direction) else {
            continue;
        };
        let t = if t0 > 0.0 {
            t0
        } else if t1 > 0.0 {
            t1
        } else {
            continue;
        };
        if t <= max_range && best.is_none_or(|b| t < b.range) {
            best = Some(RayHit { range: t, class_id: prim.class_id });
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedRay {
    /// World-frame unit direction.
    pub direction: Vec3,
    /// Sensor-frame unit direction (x forward, y left, z up).
    pub sensor_direction: Vec3,
    pub hit: Option<RayHit>,
}

/// Casts the camera's ray grid from `pose`.
pub fn render(world: &GroundTruthWorld, camera: &CameraModel, pose: &Pose) -> Vec<RenderedRay> {
    let origin = pose.pos();
    let identity = Pose::new(Vec3::zeros(), 0.0);
    camera
        .ray_angles()
        .map(|(az, el)| {
            let direction = pose.ray_direction(az, el);
            let hit = ray_intersect(world, &origin, &direction, camera.max_range)
                .expect("ray directions are unit length by construction");
            RenderedRay {
                direction,
                sensor_direction: identity.ray_direction(az, el),
                hit,
            }
        })
        .collect()
}

/// Dense voxel labelling of a world: each voxel carries the class of the
/// first primitive containing its center, or `None` when free.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGrid {
    pub params: MapParams,
    dims: [u32; 3],
    labels: Vec<Option<u8>>,
}

impl GroundTruthGrid {
    fn index(&self, k: VoxelKey) -> usize {
        (k.ix as usize * self.dims[1] as usize + k.iy as usize) * self.dims[2] as usize + k.iz as usize
    }

    pub fn label(&self, key: VoxelKey) -> Option<usize> {
        self.labels[self.index(key)].map(usize::from)
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Labeled voxels with at least one free face neighbour inside the grid:
    /// the surface a sensor moving through free space can observe.
    pub fn surface_voxels(&self) -> Vec<VoxelKey> {
        let d = self.dims.map(|v| v as i64);
        self.params
            .keys()
            .filter(|k| self.label(*k).is_some())
            .filter(|k| {
                const N: [[i64; 3]; 6] =
                    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
                N.iter().any(|o| {
                    let n = [k.ix as i64 + o[0], k.iy as i64 + o[1], k.iz as i64 + o[2]];
                    (0..3).all(|i| n[i] >= 0 && n[i] < d[i])
                        && self
                            .label(VoxelKey::new(n[0] as u32, n[1] as u32, n[2] as u32))
                            .is_none()
                })
            })
            .collect()
    }
}

pub fn voxelize_ground_truth(world: &GroundTruthWorld, params: &MapParams) -> Result<GroundTruthGrid> {
    if !params.bounds.contains_box(&world.bounds) {
        return Err(Error::InvalidParams("world bounds must lie within the map bounds".into()));
    }
    let labels = params
        .keys()
        .map(|k| {
            let c = params.center_of(k);
            world
                .primitives
                .iter()
                .find(|p| p.shape.contains(&c))
                .map(|p| p.class_id as u8)
        })
        .collect();
    Ok(GroundTruthGrid {
        params: params.clone(),
        dims: params.dims(),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes() -> Vec<String> {
        ["Sky", "Floor", "Ship", "Harbor wall", "Unknown"]
            .map(String::from)
            .to_vec()
    }

    fn one_box(class_id: usize) -> GroundTruthWorld {
        GroundTruthWorld::new(
            Aabb::new([-5.0; 3], [5.0; 3]),
            classes(),
            vec![LabeledPrimitive {
                name: "b".into(),
                shape: Aabb::new([3.0, -1.0, -1.0], [4.0, 1.0, 1.0]),
                class_id,
            }],
        )
        .unwrap()
    }

    #[test]
    fn perpendicular_hit() {
        let w = one_box(2);
        let hit = ray_intersect(&w, &Vec3::zeros(), &Vec3::x(), 8.0).unwrap().unwrap();
        assert!((hit.range - 3.0).abs() < 1e-12);
        assert_eq!(hit.class_id, 2);
    }

    #[test]
    fn ray_pointing_away_misses() {
        let w = one_box(2);
        assert!(ray_intersect(&w, &Vec3::zeros(), &-Vec3::x(), 8.0).unwrap().is_none());
        // and out of range
        assert!(ray_intersect(&w, &Vec3::zeros(), &Vec3::x(), 2.5).unwrap().is_none());
    }

    #[test]
    fn non_unit_direction_rejected() {
        let w = one_box(2);
        assert!(ray_intersect(&w, &Vec3::zeros(), &Vec3::new(2.0, 0.0, 0.0), 8.0).is_err());
    }

    #[test]
    fn overlapping_boxes_nearer_face_then_lower_index() {
        let mk = |shape, class_id| LabeledPrimitive { name: "p".into(), shape, class_id };
        let w = GroundTruthWorld::new(
            Aabb::new([-5.0; 3], [5.0; 3]),
            classes(),
            vec![
                mk(Aabb::new([3.0, -1.0, -1.0], [4.0, 1.0, 1.0]), 2),
                mk(Aabb::new([2.0, -1.0, -1.0], [3.5, 1.0, 1.0]), 4),
                mk(Aabb::new([2.0, -2.0, -2.0], [3.0, 2.0, 2.0]), 1),
            ],
        )
        .unwrap();
        let hit = ray_intersect(&w, &Vec3::zeros(), &Vec3::x(), 8.0).unwrap().unwrap();
        // both 2nd and 3rd boxes start at 2.0; the 2nd is listed first
        assert_eq!(hit.class_id, 4);
        assert_eq!(hit.range, 2.0);
    }

    #[test]
    fn single_ray_render_matches_intersect() {
        let w = one_box(3);
        let cam = CameraModel::default().with_grid(1, 1, 8.0);
        let pose = Pose::new(Vec3::zeros(), 0.0);
        let rays = render(&w, &cam, &pose);
        assert_eq!(rays.len(), 1);
        let direct = ray_intersect(&w, &Vec3::zeros(), &Vec3::x(), 8.0).unwrap();
        assert_eq!(rays[0].hit, direct);
    }

    #[test]
    fn empty_world_renders_no_hits() {
        let w = GroundTruthWorld::empty(Aabb::new([-5.0; 3], [5.0; 3]), classes());
        let rays = render(&w, &CameraModel::default(), &Pose::new(Vec3::zeros(), 1.0));
        assert_eq!(rays.len(), 64 * 48);
        assert!(rays.iter().all(|r| r.hit.is_none()));
    }

    #[test]
    fn render_grid_matches_per_ray_oracle() {
        let w = one_box(2);
        let cam = CameraModel::default().with_grid(16, 12, 8.0);
        let pose = Pose::new(Vec3::new(0.5, -0.3, 0.2), 0.3);
        let rays = render(&w, &cam, &pose);
        let angles: Vec<_> = cam.ray_angles().collect();
        assert_eq!(rays.len(), 16 * 12);
        for (ray, (az, el)) in rays.iter().zip(angles) {
            let heading = 0.3 + az;
            let dir = Vec3::new(el.cos() * heading.cos(), el.cos() * heading.sin(), el.sin());
            let expected = ray_intersect(&w, &pose.pos(), &dir, 8.0).unwrap();
            match (ray.hit, expected) {
                (Some(a), Some(b)) => {
                    assert!((a.range - b.range).abs() < 1e-12);
                    assert_eq!(a.class_id, b.class_id);
                }
                (None, None) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
        assert!(rays.iter().any(|r| r.hit.is_some()));
        assert!(rays.iter().any(|r| r.hit.is_none()));
    }

    #[test]
    fn render_is_deterministic() {
        let w = one_box(2);
        let pose = Pose::new(Vec3::new(0.1, 0.2, 0.3), -2.0);
        let a = render(&w, &CameraModel::default(), &pose);
        let b = render(&w, &CameraModel::default(), &pose);
        assert_eq!(a, b);
    }

    #[test]
    fn voxelize_unit_box() {
        let w = GroundTruthWorld::new(
            Aabb::new([-2.0; 3], [2.0; 3]),
            classes(),
            vec![LabeledPrimitive {
                name: "unit".into(),
                shape: Aabb::new([0.0; 3], [1.0; 3]),
                class_id: 2,
            }],
        )
        .unwrap();
        let params = MapParams {
            bounds: Aabb::new([-2.0; 3], [2.0; 3]),
            ..MapParams::default()
        };
        let grid = voxelize_ground_truth(&w, &params).unwrap();
        // centers at 0.2, 0.6 (and 1.0 is the face itself, inclusive) per axis
        let expected: Vec<VoxelKey> = params
            .keys()
            .filter(|k| {
                let c = params.center_of(*k);
                (0..3).all(|i| c[i] >= 0.0 && c[i] <= 1.0)
            })
            .collect();
        for k in params.keys() {
            assert_eq!(grid.label(k).is_some(), expected.contains(&k));
        }
        assert_eq!(grid.labeled_count(), expected.len());
    }

    #[test]
    fn voxelize_empty_world_is_free() {
        let w = GroundTruthWorld::empty(Aabb::new([0.0; 3], [2.0; 3]), classes());
        let params = MapParams {
            bounds: Aabb::new([0.0; 3], [2.0; 3]),
            ..MapParams::default()
        };
        let grid = voxelize_ground_truth(&w, &params).unwrap();
        assert_eq!(grid.labeled_count(), 0);
        assert!(grid.surface_voxels().is_empty());
    }
}
