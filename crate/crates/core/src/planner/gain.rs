//! Per-voxel information gain and the cumulative node gain recursion.

use crate::map::{logistic, occupancy_entropy, plogp, OccupancyEntropy, OctreeMap, VoxelKey};

use super::params::GainMode;

/// Gain of a single voxel under `mode`.
///
/// `weights` are the per-class weights of the semantic gain (ignored by the
/// other modes). With `negate` the geometric gain is `-H`, otherwise
/// `+H`.
pub fn voxel_gain(
    map: &OctreeMap,
    key: VoxelKey,
    mode: GainMode,
    weights: &[f64],
    negate: bool,
) -> f64 {
    match mode {
        GainMode::BaselineUnknownCount => {
            if map.is_unknown(key) {
                1.0
            } else {
                0.0
            }
        }
        GainMode::GeometricEntropy => {
            let h = map.entropy_occ(key);
            if negate {
                -h
            } else {
                h
            }
        }
        GainMode::SemanticWeighted => {
            let weighted: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * map.entropy_sem_class(key, k))
                .sum();
            map.entropy_occ(key) * weighted
        }
    }
}

/// `G(parent) + S * exp(-lambda * length)`.
pub fn node_gain(parent_gain: f64, visible_sum: f64, segment_length: f64, distance_weight: f64) -> f64 {
    parent_gain + visible_sum * (-distance_weight * segment_length).exp()
}

/// Gain evaluator for the planner's inner loop: one octree lookup per voxel
/// and a precomputed value for never-observed voxels.
pub(crate) struct GainEvaluator<'a> {
    map: &'a OctreeMap,
    mode: GainMode,
    weights: &'a [f64],
    sign: f64,
    entropy: OccupancyEntropy,
    unknown_eps: f64,
    unobserved: f64,
}

impl<'a> GainEvaluator<'a> {
    pub fn new(map: &'a OctreeMap, mode: GainMode, weights: &'a [f64], negate: bool) -> Self {
        let params = map.params();
        let mut ev = Self {
            map,
            mode,
            weights,
            sign: if negate { -1.0 } else { 1.0 },
            entropy: params.entropy,
            unknown_eps: params.unknown_epsilon,
            unobserved: 0.0,
        };
        let k = params.num_classes;
        let uniform_log = vec![-(k as f64).ln(); k];
        ev.unobserved = ev.eval(params.prior_log_odds(), &uniform_log);
        ev
    }

    fn eval(&self, log_odds: f64, class_log: &[f64]) -> f64 {
        let p = logistic(log_odds);
        match self.mode {
            GainMode::BaselineUnknownCount => {
                if (p - 0.5).abs() < self.unknown_eps {
                    1.0
                } else {
                    0.0
                }
            }
            GainMode::GeometricEntropy => self.sign * occupancy_entropy(p, self.entropy),
            GainMode::SemanticWeighted => {
                let weighted: f64 = self
                    .weights
                    .iter()
                    .zip(class_log)
                    .map(|(w, l)| w * plogp(l.exp()))
                    .sum();
                occupancy_entropy(p, self.entropy) * weighted
            }
        }
    }

    #[inline]
    pub fn gain(&self, key: VoxelKey) -> f64 {
        match self.map.raw(key) {
            Some((l, classes)) => self.eval(l, classes),
            None => self.unobserved,
        }
    }
}
