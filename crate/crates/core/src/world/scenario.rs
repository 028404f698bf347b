//! JSON scenario files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "mini-room",
//!   "bounds": { "min": [-0.4, -0.4, -0.4], "max": [10.4, 6.4, 3.6] },
//!   "classes": ["Sky", "Floor", "Ship", "Harbor wall", "Unknown"],
//!   "boxes": [ { "name": "floor", "class": "Floor", "min": [..], "max": [..] } ],
//!   "camera": { "h_fov": 1.5708, "v_fov": 1.0472, "cols": 64, "rows": 48, "max_range": 8.0 },
//!   "start": { "position": [2.0, 3.0, 1.4], "yaw": 0.0 },
//!   "workspace": { "min": [..], "max": [..] }
//! }
//! ```
//!
//! `camera` is optional and falls back to the default camera.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose};

use super::{CameraModel, GroundTruthWorld, LabeledPrimitive};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub name: String,
    pub class: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub bounds: Aabb,
    pub classes: Vec<String>,
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub camera: CameraModel,
    pub start: Pose,
    pub workspace: Aabb,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.version != SCENARIO_VERSION {
            return Err(Error::Config(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                s.version
            )));
        }
        s.world()?;
        s.camera.validate()?;
        if !s.workspace.is_valid() || !s.bounds.contains_box(&s.workspace) {
            return Err(Error::Config("workspace must be a box inside the world bounds".into()));
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn world(&self) -> Result<GroundTruthWorld> {
        let primitives = self
            .boxes
            .iter()
            .map(|b| {
                let class_id = self
                    .classes
                    .iter()
                    .position(|c| c.eq_ignore_ascii_case(&b.class))
                    .ok_or_else(|| {
                        Error::Config(format!("box '{}' uses unknown class '{}'", b.name, b.class))
                    })?;
                Ok(LabeledPrimitive {
                    name: b.name.clone(),
                    shape: Aabb::new(b.min, b.max),
                    class_id,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GroundTruthWorld::new(self.bounds, self.classes.clone(), primitives)
            .map_err(|e| Error::Config(e.to_string()))
    }
}
