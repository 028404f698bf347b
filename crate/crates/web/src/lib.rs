//! Browser bindings for the volsem demo page: the endpoint hit-probability
//! curve, a single-voxel gain explorer and a step-by-step exploration run.

use volsem::map::{endpoint_hit_probability, MapParams, OctreeMap, VoxelKey};
use volsem::planner::{voxel_gain, GainMode};
use volsem::runner::{Experiment, ExperimentConfig, Mission, ModeSpec};
use volsem::world::Scenario;
use volsem::Aabb;
use wasm_bindgen::prelude::*;

const MINI_ROOM: &str = include_str!("../../core/scenarios/mini_room.json");
const MINI_SHIPYARD: &str = include_str!("../../core/scenarios/mini_shipyard.json");

fn js_err(e: volsem::Error) -> String {
    e.to_string()
}

/// Hit probability at `samples` evenly spaced ranges in `(0, max_range]`.
#[wasm_bindgen]
pub fn hit_probability_curve(
    axial_scale: f64,
    resolution: f64,
    max_range: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if samples == 0 || !(max_range > 0.0) {
        return Err("need at least one sample and a positive range".into());
    }
    (1..=samples)
        .map(|i| endpoint_hit_probability(max_range * i as f64 / samples as f64, axial_scale, resolution))
        .collect::<volsem::Result<Vec<_>>>()
        .map_err(js_err)
}

/// Gains `[baseline, geometric, semantic]` of one voxel with occupancy
/// probability `p_occ` and class distribution `class_probs`, scored with
/// `weights`.
#[wasm_bindgen]
pub fn voxel_gains(p_occ: f64, class_probs: Vec<f64>, weights: Vec<f64>) -> Result<Vec<f64>, String> {
    let k = class_probs.len();
    if weights.len() != k {
        return Err(format!("{} weights for {k} classes", weights.len()));
    }
    let params = MapParams { num_classes: k, bounds: Aabb::new([0.0; 3], [1.0; 3]), ..MapParams::default() };
    let mut map = OctreeMap::new(params).map_err(js_err)?;
    let key = VoxelKey::new(0, 0, 0);
    // from the 0.5 prior a single update lands exactly on p_occ
    if p_occ != 0.5 {
        map.update_occupancy(key, p_occ).map_err(js_err)?;
    }
    map.update_semantics(key, &class_probs).map_err(js_err)?;
    Ok(GainMode::ALL.iter().map(|m| voxel_gain(&map, key, *m, &weights, false)).collect())
}

/// An exploration mission in one of the bundled scenarios, advanced one
/// iteration at a time from the page.
#[wasm_bindgen]
pub struct Explorer {
    mission: Mission,
}

#[wasm_bindgen]
impl Explorer {
    /// `scenario` is `mini-room` or `mini-shipyard`; `mode` takes the same
    /// names as the command-line `compare --modes` list.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str, mode: &str, seed: u64, iterations: usize) -> Result<Explorer, String> {
        let text = match scenario {
            "mini-room" => MINI_ROOM,
            "mini-shipyard" => MINI_SHIPYARD,
            other => return Err(format!("unknown scenario '{other}'")),
        };
        let scenario = Scenario::from_json(text).map_err(js_err)?;
        let mut config = ExperimentConfig::from_json(r#"{ "scenario": "embedded" }"#).map_err(js_err)?;
        config.seed = seed;
        config.iterations = iterations;
        let exp = Experiment::new(config, scenario).map_err(js_err)?;
        let mode: ModeSpec = mode.parse().map_err(js_err)?;
        let exp = mode.apply(&exp).map_err(js_err)?;
        Ok(Self { mission: Mission::new(exp).map_err(js_err)? })
    }

    /// Runs one iteration; false once the mission has finished.
    pub fn step(&mut self) -> Result<bool, String> {
        Ok(self.mission.step().map_err(js_err)?.is_some())
    }

    pub fn finished(&self) -> bool {
        self.mission.is_finished()
    }

    pub fn complete(&self) -> bool {
        self.mission.is_complete()
    }

    pub fn steps(&self) -> usize {
        self.mission.records().len()
    }

    /// Total map entropy, before the first scan and after each iteration.
    pub fn entropy(&self) -> Vec<f64> {
        std::iter::once(self.mission.initial_entropy())
            .chain(self.mission.records().iter().map(|r| r.entropy))
            .collect()
    }

    /// Occupied-voxel count after each iteration.
    pub fn occupied(&self) -> Vec<f64> {
        self.mission.records().iter().map(|r| r.occupied as f64).collect()
    }

    /// `[x, y, z, yaw]` of the next scan.
    pub fn pose(&self) -> Vec<f64> {
        let p = self.mission.pose();
        vec![p.position[0], p.position[1], p.position[2], p.yaw]
    }

    /// Grid size `[nx, ny, nz]`.
    pub fn dims(&self) -> Vec<u32> {
        self.mission.map().params().dims().to_vec()
    }

    /// Map bounds `[min_x, min_y, min_z, max_x, max_y, max_z]`.
    pub fn bounds(&self) -> Vec<f64> {
        let b = self.mission.map().params().bounds;
        b.min.iter().chain(b.max.iter()).copied().collect()
    }

    pub fn class_names(&self) -> Vec<String> {
        self.mission.experiment().scenario.classes.clone()
    }

    /// Horizontal layer `iz` in x-major order: 0 unknown, 1 free,
    /// `2 + class` occupied.
    pub fn slice(&self, iz: u32) -> Vec<u8> {
        let map = self.mission.map();
        let p_occ = self.mission.experiment().config.planner.occupied_threshold;
        let [nx, ny, _] = map.params().dims();
        let mut out = Vec::with_capacity((nx * ny) as usize);
        for ix in 0..nx {
            for iy in 0..ny {
                let k = VoxelKey::new(ix, iy, iz);
                out.push(if map.is_unknown(k) {
                    0
                } else if map.occupancy_prob(k) > p_occ {
                    2 + map.argmax_class(k) as u8
                } else {
                    1
                });
            }
        }
        out
    }

    /// Fraction of the ground-truth surface mapped as occupied.
    pub fn surface_completeness(&self) -> Result<f64, String> {
        Ok(self.mission.completeness().map_err(js_err)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_falls_with_range() {
        let c = hit_probability_curve(0.005, 0.4, 8.0, 40).unwrap();
        assert_eq!(c.len(), 40);
        assert!(c.windows(2).all(|w| w[1] <= w[0]));
        assert!(hit_probability_curve(0.005, 0.4, 8.0, 0).is_err());
    }

    #[test]
    fn uniform_voxel_gains() {
        let g = voxel_gains(0.5, vec![0.2; 5], vec![0.2; 5]).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 0.34657).abs() < 1e-4);
        assert!((g[2] - 0.11156).abs() < 1e-4);
        assert!(voxel_gains(0.5, vec![0.2; 5], vec![0.5; 2]).is_err());
    }

    #[test]
    fn explorer_steps_and_reports() {
        let mut e = Explorer::new("mini-room", "baseline", 3, 4).unwrap();
        while e.step().unwrap() {}
        assert_eq!(e.steps(), 4);
        assert_eq!(e.entropy().len(), 5);
        let d = e.dims();
        let s = e.slice(3);
        assert_eq!(s.len(), (d[0] * d[1]) as usize);
        assert!(s.contains(&1));
        assert!(Explorer::new("moon", "baseline", 0, 1).is_err());
        assert!(Explorer::new("mini-room", "warp", 0, 1).is_err());
    }
}
