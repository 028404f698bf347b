//! Simulated RGB-D + segmentation front end: noisy ranges along the true ray
//! direction and a per-point class distribution read from a confusion matrix.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::world::{render, CameraModel, GroundTruthWorld};

/// Non-positive range draws are retried this many times before the point is
/// dropped.
const MAX_RANGE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Axial scaling `lambda_a` in `sigma_a = lambda_a * z^2` (1/m). Zero
    /// disables noise.
    pub axial_scale: f64,
    /// Lateral standard deviation (m). Carried for completeness, never applied.
    pub lateral_sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { axial_scale: 0.005, lateral_sigma: 0.0 }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { axial_scale: 0.0, lateral_sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.axial_scale >= 0.0 && self.lateral_sigma >= 0.0) {
            return Err(Error::InvalidParams("noise parameters must be non-negative".into()));
        }
        Ok(())
    }
}

/// Row-stochastic matrix: entry `(k, j)` is the probability that the
/// segmentation reports class `j` when the true class is `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfusionSpec", into = "ConfusionSpec")]
pub struct ConfusionMatrix {
    rows: Vec<Vec<f64>>,
}

/// Serialized form: either a full matrix or a diagonal value with the rest
/// of each row spread uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfusionSpec {
    Diagonal { diagonal: f64, num_classes: usize },
    Matrix { matrix: Vec<Vec<f64>> },
}

impl TryFrom<ConfusionSpec> for ConfusionMatrix {
    type Error = Error;

    fn try_from(spec: ConfusionSpec) -> Result<Self> {
        match spec {
            ConfusionSpec::Diagonal { diagonal, num_classes } => {
                Self::uniform_off_diagonal(num_classes, diagonal)
            }
            ConfusionSpec::Matrix { matrix } => Self::new(matrix),
        }
    }
}

impl From<ConfusionMatrix> for ConfusionSpec {
    fn from(cm: ConfusionMatrix) -> Self {
        ConfusionSpec::Matrix { matrix: cm.rows }
    }
}

impl ConfusionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidParams("confusion matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidParams("confusion matrix must be square".into()));
            }
            if row.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidParams(format!("row {i} has a negative entry")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("row {i} does not sum to 1")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Self {
        Self::uniform_off_diagonal(k, 1.0).expect("identity is row-stochastic")
    }

    /// `diagonal` on the diagonal, `(1 - diagonal) / (k - 1)` elsewhere.
    pub fn uniform_off_diagonal(k: usize, diagonal: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&diagonal) {
            return Err(Error::InvalidParams("diagonal must lie in [0, 1]".into()));
        }
        if k == 1 {
            return Self::new(vec![vec![1.0]]);
        }
        let off = (1.0 - diagonal) / (k as f64 - 1.0);
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { diagonal } else { off }).collect())
                .collect(),
        )
    }

    pub fn num_classes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, true_class: usize) -> &[f64] {
        &self.rows[true_class]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticPoint {
    /// Sensor frame: x forward, y left, z up (m).
    pub position: Vec3,
    pub range: f64,
    pub class_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemanticPointCloud {
    pub points: Vec<SemanticPoint>,
}

impl SemanticPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws a measured range around `true_range` with standard deviation
/// `lambda_a * z^2`, truncated to `(0, max_range]`. Returns `None` when every
/// attempt came out non-positive.
pub fn sample_range<R: Rng + ?Sized>(
    true_range: f64,
    noise: &NoiseModel,
    max_range: f64,
    rng: &mut R,
) -> Option<f64> {
    let sigma = noise.axial_scale * true_range * true_range;
    if sigma == 0.0 {
        return Some(true_range.min(max_range));
    }
    let normal = Normal::new(true_range, sigma).ok()?;
    (0..MAX_RANGE_ATTEMPTS)
        .map(|_| normal.sample(rng))
        .find(|z| *z > 0.0)
        .map(|z| z.min(max_range))
}

/// Class distribution the segmentation reports for a point of `true_class`.
pub fn semantic_response(true_class: usize, cm: &ConfusionMatrix) -> &[f64] {
    cm.row(true_class)
}

/// One scan: renders the world from `pose`, perturbs each hit range and
/// attaches the class response. Rays without a hit produce no point.
pub fn generate_measurement<R: Rng + ?Sized>(
    world: &GroundTruthWorld,
    camera: &CameraModel,
    pose: &Pose,
    noise: &NoiseModel,
    cm: &ConfusionMatrix,
    rng: &mut R,
) -> SemanticPointCloud {
    let points = render(world, camera, pose)
        .into_iter()
        .filter_map(|ray| {
            let hit = ray.hit?;
            let range = sample_range(hit.range, noise, camera.max_range, rng)?;
            Some(SemanticPoint {
                position: ray.sensor_direction * range,
                range,
                class_probs: semantic_response(hit.class_id, cm).to_vec(),
            })
        })
        .collect();
    SemanticPointCloud { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::world::LabeledPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_sample_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = sample_range(3.7, &NoiseModel::noiseless(), 8.0, &mut rng).unwrap();
        assert_eq!(z, 3.7);
    }

    #[test]
    fn sample_std_matches_quadratic_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = NoiseModel { axial_scale: 0.005, lateral_sigma: 0.0 };
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_range(10.0, &noise, 100.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!((std - 0.5).abs() < 0.5 * 0.03, "std {std}");
        assert!((mean - 10.0).abs() < 0.01);
    }

    #[test]
    fn seeded_samples_reproduce() {
        let noise = NoiseModel::default();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..20)
                .map(|_| sample_range(5.0, &noise, 8.0, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn identity_confusion_is_one_hot() {
        let cm = ConfusionMatrix::identity(5);
        assert_eq!(semantic_response(3, &cm), &[0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn default_confusion_row_for_ship() {
        let cm = ConfusionMatrix::uniform_off_diagonal(5, 0.9).unwrap();
        // Ship is the third class (index 2).
        let row = semantic_response(2, &cm);
        let expected = [0.025, 0.025, 0.9, 0.025, 0.025];
        for (a, b) in row.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        for k in 0..5 {
            assert!((cm.row(k).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn confusion_validation() {
        assert!(ConfusionMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(ConfusionMatrix::new(vec![vec![1.0, 0.0]]).is_err());
        let spec: ConfusionMatrix =
            serde_json::from_str(r#"{"diagonal": 0.9, "num_classes": 5}"#).unwrap();
        assert_eq!(spec.num_classes(), 5);
        let full: ConfusionMatrix =
            serde_json::from_str(r#"{"matrix": [[0.8, 0.2], [0.1, 0.9]]}"#).unwrap();
        assert_eq!(full.row(1), &[0.1, 0.9]);
    }

    fn wall_world() -> GroundTruthWorld {
        let classes = ["Sky", "Floor", "Ship", "Harbor wall", "Unknown"].map(String::from).to_vec();
        GroundTruthWorld::new(
            Aabb::new([-10.0; 3], [10.0; 3]),
            classes,
            vec![LabeledPrimitive {
                name: "wall".into(),
                shape: Aabb::new([4.0, -3.0, -2.0], [5.0, 3.0, 2.0]),
                class_id: 3,
            }],
        )
        .unwrap()
    }

    #[test]
    fn empty_world_gives_empty_cloud() {
        let w = GroundTruthWorld::empty(Aabb::new([-1.0; 3], [1.0; 3]), vec!["a".into()]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud = generate_measurement(
            &w,
            &CameraModel::default(),
            &Pose::new(Vec3::zeros(), 0.0),
            &NoiseModel::default(),
            &ConfusionMatrix::identity(1),
            &mut rng,
        );
        assert!(cloud.is_empty());
    }

    #[test]
    fn noiseless_cloud_matches_render() {
        let w = wall_world();
        let cam = CameraModel::default().with_grid(16, 12, 8.0);
        let pose = Pose::new(Vec3::new(0.0, 0.5, 0.0), 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cm = ConfusionMatrix::identity(5);
        let cloud = generate_measurement(&w, &cam, &pose, &NoiseModel::noiseless(), &cm, &mut rng);
        let rays = render(&w, &cam, &pose);
        let hits: Vec<_> = rays.iter().filter_map(|r| r.hit).collect();
        assert_eq!(cloud.len(), hits.len());
        assert!(!cloud.is_empty());
        for (p, h) in cloud.points.iter().zip(hits) {
            assert_eq!(p.range, h.range);
            assert_eq!(p.class_probs, cm.row(h.class_id));
            assert!((p.position.norm() - h.range).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_point_count_equals_hit_rays() {
        let w = wall_world();
        let cam = CameraModel::default();
        let pose = Pose::new(Vec3::new(0.0, 0.0, 0.0), -0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cm = ConfusionMatrix::uniform_off_diagonal(5, 0.9).unwrap();
        let cloud = generate_measurement(&w, &cam, &pose, &NoiseModel::default(), &cm, &mut rng);
        let hits = render(&w, &cam, &pose).iter().filter(|r| r.hit.is_some()).count();
        assert_eq!(cloud.len(), hits);
        assert!(cloud.points.iter().all(|p| p.range > 0.0 && p.range <= 8.0));
    }
}
