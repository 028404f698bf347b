use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::map::MapParams;
use crate::planner::PlannerParams;
use crate::sensor::{ConfusionMatrix, NoiseModel};
use crate::world::{CameraModel, Scenario};

/// Experiment configuration as read from JSON. Only `scenario` is required.
///
/// `map.bounds` and `map.num_classes` are always taken from the scenario.
/// `camera`, `confusion`, `planner.workspace` and `eval_bounds` fall back to
/// the scenario camera, an identity confusion matrix, the scenario workspace
/// and the map bounds respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario file, relative to the config file's directory.
    pub scenario: PathBuf,
    #[serde(default)]
    pub map: MapParams,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub confusion: Option<ConfusionMatrix>,
    #[serde(default)]
    pub camera: Option<CameraModel>,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Region whose voxels enter the total-entropy metric.
    #[serde(default)]
    pub eval_bounds: Option<Aabb>,
}

fn default_iterations() -> usize {
    300
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file and loads the scenario it points to.
    pub fn load(path: impl AsRef<Path>) -> Result<Experiment> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.scenario.is_relative() {
            cfg.scenario = base.join(&cfg.scenario);
        }
        let scenario = Scenario::load(&cfg.scenario)?;
        Experiment::new(cfg, scenario)
    }
}

/// A config with every default filled in, paired with its scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
}

impl Experiment {
    pub fn new(mut config: ExperimentConfig, scenario: Scenario) -> Result<Self> {
        let k = scenario.classes.len();
        config.map.bounds = scenario.bounds;
        config.map.num_classes = k;
        config.camera.get_or_insert(scenario.camera);
        config.confusion.get_or_insert_with(|| ConfusionMatrix::identity(k));
        config.planner.workspace.get_or_insert(scenario.workspace);
        config.eval_bounds.get_or_insert(scenario.bounds);
        if config.planner.class_weights.is_empty() {
            config.planner.class_weights = config.planner.weights(k);
        }
        let exp = Self { config, scenario };
        exp.validate()?;
        Ok(exp)
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        let cfg_err = |e: Error| Error::Config(e.to_string());
        c.map.validate().map_err(cfg_err)?;
        c.noise.validate().map_err(cfg_err)?;
        self.camera().validate().map_err(cfg_err)?;
        c.planner.validate(self.num_classes()).map_err(cfg_err)?;
        if self.confusion().num_classes() != self.num_classes() {
            return Err(Error::Config("confusion matrix size does not match the class count".into()));
        }
        if c.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !self.eval_bounds().is_valid() {
            return Err(Error::Config("eval_bounds must be a non-empty box".into()));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.scenario.classes.len()
    }

    pub fn camera(&self) -> CameraModel {
        self.config.camera.expect("filled in by Experiment::new")
    }

    pub fn confusion(&self) -> &ConfusionMatrix {
        self.config.confusion.as_ref().expect("filled in by Experiment::new")
    }

    pub fn eval_bounds(&self) -> Aabb {
        self.config.eval_bounds.expect("filled in by Experiment::new")
    }

    /// First 16 hex digits of the SHA-256 of the resolved config and
    /// scenario. The output directory does not enter the hash.
    pub fn config_hash(&self) -> String {
        let mut cfg = self.config.clone();
        cfg.out_dir = PathBuf::new();
        cfg.scenario = PathBuf::from(&self.scenario.name);
        let doc = serde_json::json!({ "config": cfg, "scenario": self.scenario });
        let digest = Sha256::digest(doc.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Resolved config and scenario as pretty JSON.
    pub fn to_pretty_json(&self) -> Result<String> {
        let doc = serde_json::json!({ "config": self.config, "scenario": self.scenario });
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}
