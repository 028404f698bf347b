use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Tolerance used when turning `extent / resolution` into a cell count, so
/// that e.g. 10.0 / 0.4 gives 25 cells and not 26.
const CELL_COUNT_EPS: f64 = 1e-9;

/// Occupancy entropy used by gains and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancyEntropy {
    /// `-P ln P`, the single-term form.
    #[default]
    SingleTerm,
    /// `-P ln P - (1-P) ln (1-P)`.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapParams {
    pub resolution: f64,
    pub bounds: Aabb,
    pub num_classes: usize,
    pub log_odds_min: f64,
    pub log_odds_max: f64,
    pub p_free: f64,
    pub prior_occupancy: f64,
    /// Class probabilities are floored at this value before every Bayes product.
    pub class_floor: f64,
    /// Half-width of the band around 0.5 in which a voxel counts as unknown.
    pub unknown_epsilon: f64,
    pub entropy: OccupancyEntropy,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            resolution: 0.4,
            bounds: Aabb::new([0.0; 3], [10.0, 10.0, 4.0]),
            num_classes: 5,
            log_odds_min: -3.5,
            log_odds_max: 3.5,
            p_free: 0.4,
            prior_occupancy: 0.5,
            class_floor: 1e-6,
            unknown_epsilon: 1e-3,
            entropy: OccupancyEntropy::SingleTerm,
        }
    }
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive");
        }
        if !self.bounds.is_valid() {
            return bad("bounds_max must exceed bounds_min on every axis");
        }
        if self.num_classes == 0 {
            return bad("num_classes must be positive");
        }
        if !(self.log_odds_min < 0.0 && 0.0 < self.log_odds_max) {
            return bad("log-odds clamp must satisfy min < 0 < max");
        }
        if !(self.p_free > 0.0 && self.p_free < 0.5) {
            return bad("p_free must lie in (0, 0.5)");
        }
        if !(self.prior_occupancy > 0.0 && self.prior_occupancy < 1.0) {
            return bad("prior_occupancy must lie in (0, 1)");
        }
        if !(self.class_floor >= 0.0 && self.class_floor * self.num_classes as f64 <= 1.0) {
            return bad("class_floor must be non-negative and at most 1/num_classes");
        }
        Ok(())
    }

    /// Cells per axis: `ceil((max - min) / resolution)`.
    pub fn dims(&self) -> [u32; 3] {
        let e = self.bounds.extent();
        let cells = |len: f64| ((len / self.resolution) - CELL_COUNT_EPS).ceil().max(1.0) as u32;
        [cells(e.x), cells(e.y), cells(e.z)]
    }

    pub fn voxel_count(&self) -> usize {
        let [x, y, z] = self.dims();
        x as usize * y as usize * z as usize
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.bounds.min[i] && p[i] < self.bounds.max[i])
    }

    pub fn contains_key(&self, key: VoxelKey) -> bool {
        let d = self.dims();
        key.ix < d[0] && key.iy < d[1] && key.iz < d[2]
    }

    /// Grid key of the voxel containing `p` (inclusive min, exclusive max).
    pub fn key_of(&self, p: &Vec3) -> Result<VoxelKey> {
        if !self.contains_point(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y, z: p.z });
        }
        let d = self.dims();
        let mut idx = [0u32; 3];
        for i in 0..3 {
            let c = ((p[i] - self.bounds.min[i]) / self.resolution).floor() as i64;
            idx[i] = c.clamp(0, d[i] as i64 - 1) as u32;
        }
        Ok(VoxelKey::new(idx[0], idx[1], idx[2]))
    }

    pub fn center_of(&self, key: VoxelKey) -> Vec3 {
        let r = self.resolution;
        let b = &self.bounds.min;
        Vec3::new(
            b[0] + (key.ix as f64 + 0.5) * r,
            b[1] + (key.iy as f64 + 0.5) * r,
            b[2] + (key.iz as f64 + 0.5) * r,
        )
    }

    pub fn voxel_box(&self, key: VoxelKey) -> Aabb {
        let c = self.center_of(key);
        let h = 0.5 * self.resolution;
        Aabb::new([c.x - h, c.y - h, c.z - h], [c.x + h, c.y + h, c.z + h])
    }

    pub fn prior_log_odds(&self) -> f64 {
        logit(self.prior_occupancy)
    }

    /// All keys of the grid in lexicographic `(ix, iy, iz)` order.
    pub fn keys(&self) -> impl Iterator<Item = VoxelKey> {
        let [dx, dy, dz] = self.dims();
        (0..dx).flat_map(move |x| {
            (0..dy).flat_map(move |y| (0..dz).map(move |z| VoxelKey::new(x, y, z)))
        })
    }
}

/// Integer grid address of a voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelKey {
    pub ix: u32,
    pub iy: u32,
    pub iz: u32,
}

impl VoxelKey {
    pub const fn new(ix: u32, iy: u32, iz: u32) -> Self {
        Self { ix, iy, iz }
    }

    pub fn axis(&self, i: usize) -> u32 {
        match i {
            0 => self.ix,
            1 => self.iy,
            _ => self.iz,
        }
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> MapParams {
        MapParams {
            bounds: Aabb::new([0.0; 3], [4.0, 4.0, 4.0]),
            ..MapParams::default()
        }
    }

    #[test]
    fn key_of_lower_corner() {
        let p = params();
        assert_eq!(p.key_of(&Vec3::zeros()).unwrap(), VoxelKey::new(0, 0, 0));
    }

    #[test]
    fn key_of_floor_arithmetic() {
        let p = params();
        let k = p.key_of(&Vec3::new(0.39, 0.0, 0.8)).unwrap();
        assert_eq!(k, VoxelKey::new(0, 0, 2));
    }

    #[test]
    fn key_of_upper_bound_is_exclusive() {
        let p = params();
        assert!(matches!(
            p.key_of(&Vec3::new(4.0, 4.0, 4.0)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn center_of_examples() {
        let p = params();
        let c = p.center_of(VoxelKey::new(0, 0, 0));
        assert!((c - Vec3::new(0.2, 0.2, 0.2)).norm() < 1e-12);
        let c = p.center_of(VoxelKey::new(2, 0, 0));
        assert!((c - Vec3::new(1.0, 0.2, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn center_round_trip_random_keys() {
        let p = MapParams {
            bounds: Aabb::new([-3.0, 1.0, -0.4], [10.2, 9.0, 3.6]),
            ..MapParams::default()
        };
        let d = p.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k = VoxelKey::new(
                rng.random_range(0..d[0]),
                rng.random_range(0..d[1]),
                rng.random_range(0..d[2]),
            );
            assert_eq!(p.key_of(&p.center_of(k)).unwrap(), k);
        }
    }

    #[test]
    fn dims_tolerate_float_division() {
        let p = MapParams {
            bounds: Aabb::new([0.0; 3], [10.0, 6.0, 3.0]),
            ..MapParams::default()
        };
        assert_eq!(p.dims(), [25, 15, 8]);
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mut p = params();
        p.p_free = 0.6;
        assert!(p.validate().is_err());
        let mut p = params();
        p.log_odds_min = 0.5;
        assert!(p.validate().is_err());
        let mut p = params();
        p.bounds = Aabb::new([0.0; 3], [1.0, 0.0, 1.0]);
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
