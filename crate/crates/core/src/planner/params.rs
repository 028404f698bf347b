use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Per-voxel information gain formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// 1 for an unknown voxel, 0 otherwise.
    #[serde(alias = "baseline")]
    BaselineUnknownCount,
    /// Occupancy entropy of the voxel.
    #[serde(alias = "geometric")]
    GeometricEntropy,
    /// Occupancy entropy times the class-weighted semantic entropy.
    #[serde(alias = "semantic")]
    SemanticWeighted,
}

impl GainMode {
    pub const ALL: [GainMode; 3] = [
        GainMode::BaselineUnknownCount,
        GainMode::GeometricEntropy,
        GainMode::SemanticWeighted,
    ];

    pub fn short_name(&self) -> &'static str {
        match self {
            GainMode::BaselineUnknownCount => "baseline",
            GainMode::GeometricEntropy => "geometric",
            GainMode::SemanticWeighted => "semantic",
        }
    }
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "baseline_unknown_count" => Ok(GainMode::BaselineUnknownCount),
            "geometric" | "geometric_entropy" => Ok(GainMode::GeometricEntropy),
            "semantic" | "semantic_weighted" => Ok(GainMode::SemanticWeighted),
            other => Err(Error::Config(format!("unknown gain mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// Tree budget per planning step, root included.
    pub tree_nodes: usize,
    /// Samples drawn before giving up on filling the tree.
    pub max_samples: usize,
    pub step_length: f64,
    pub gain_cols: u32,
    pub gain_rows: u32,
    pub gain_range: f64,
    /// Weight of the path-length discount `exp(-lambda * length)` (1/m).
    pub distance_weight: f64,
    pub gain_mode: GainMode,
    /// Class weights for the semantic gain; empty means uniform.
    pub class_weights: Vec<f64>,
    /// Box that sampled positions must lie in; defaults to the map bounds.
    pub workspace: Option<Aabb>,
    pub robot_radius: f64,
    /// Voxels above this occupancy block rays and motion.
    pub occupied_threshold: f64,
    pub gain_threshold: f64,
    pub max_retries: usize,
    /// Use the negated occupancy entropy as the geometric gain.
    pub negate_geometric_gain: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            tree_nodes: 60,
            max_samples: 600,
            step_length: 1.5,
            gain_cols: 24,
            gain_rows: 18,
            gain_range: 8.0,
            distance_weight: 0.25,
            gain_mode: GainMode::GeometricEntropy,
            class_weights: Vec::new(),
            workspace: None,
            robot_radius: 0.5,
            occupied_threshold: 0.7,
            gain_threshold: 1e-3,
            max_retries: 3,
            negate_geometric_gain: false,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.tree_nodes < 2 {
            return bad("tree budget must be at least 2 nodes");
        }
        if !(self.step_length > 0.0) {
            return bad("step length must be positive");
        }
        if self.gain_cols == 0 || self.gain_rows == 0 || !(self.gain_range > 0.0) {
            return bad("gain ray grid and range must be positive");
        }
        if !(self.distance_weight >= 0.0) || !(self.gain_threshold >= 0.0) {
            return bad("distance weight and gain threshold must be non-negative");
        }
        if !(self.robot_radius >= 0.0) {
            return bad("robot radius must be non-negative");
        }
        if !(self.occupied_threshold > 0.0 && self.occupied_threshold < 1.0) {
            return bad("occupied threshold must lie in (0, 1)");
        }
        if let Some(ws) = &self.workspace {
            if !ws.is_valid() {
                return bad("workspace must be a non-empty box");
            }
        }
        if !self.class_weights.is_empty() {
            if self.class_weights.len() != num_classes {
                return bad("class weights must have one entry per class");
            }
            if self.class_weights.iter().any(|w| !(*w >= 0.0)) {
                return bad("class weights must be non-negative");
            }
            if (self.class_weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("class weights must sum to 1");
            }
        }
        Ok(())
    }

    /// Class weights with the empty default expanded to uniform.
    pub fn weights(&self, num_classes: usize) -> Vec<f64> {
        if self.class_weights.is_empty() {
            vec![1.0 / num_classes as f64; num_classes]
        } else {
            self.class_weights.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for m in GainMode::ALL {
            assert_eq!(m.short_name().parse::<GainMode>().unwrap(), m);
        }
        let m: GainMode = serde_json::from_str("\"semantic_weighted\"").unwrap();
        assert_eq!(m, GainMode::SemanticWeighted);
        let m: GainMode = serde_json::from_str("\"baseline\"").unwrap();
        assert_eq!(m, GainMode::BaselineUnknownCount);
        assert!("nope".parse::<GainMode>().is_err());
    }

    #[test]
    fn weight_validation() {
        let mut p = PlannerParams { class_weights: vec![0.1, 0.1, 0.6, 0.1, 0.1], ..Default::default() };
        assert!(p.validate(5).is_ok());
        p.class_weights = vec![0.1, 0.1, 0.6, 0.1, 0.2];
        assert!(p.validate(5).is_err());
        p.class_weights = vec![0.5, 0.5];
        assert!(p.validate(5).is_err());
        let p = PlannerParams { tree_nodes: 1, ..Default::default() };
        assert!(p.validate(5).is_err());
        assert_eq!(PlannerParams::default().weights(4), vec![0.25; 4]);
    }
}
