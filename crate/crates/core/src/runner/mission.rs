use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::map::{integrate_scan, write_dump, OctreeMap, VoxelKey};
use crate::metrics::{
    per_class_coverage, region_keys, run_averages, surface_completeness, surface_coverage, total_entropy,
    write_metrics_csv, write_timings_csv, RunSummary, StepRecord,
};
use crate::planner::{plan_step, PlanOutcome};
use crate::sensor::generate_measurement;
use crate::world::{voxelize_ground_truth, GroundTruthWorld};

use super::config::Experiment;

#[cfg(not(target_arch = "wasm32"))]
struct Stopwatch(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Stopwatch {
    fn start() -> Self {
        Self(std::time::Instant::now())
    }

    fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

// No monotonic clock on bare wasm32; timings read as zero there.
#[cfg(target_arch = "wasm32")]
struct Stopwatch;

#[cfg(target_arch = "wasm32")]
impl Stopwatch {
    fn start() -> Self {
        Self
    }

    fn ms(&self) -> f64 {
        0.0
    }
}

/// Spacing of the ground-truth contact check along a motion (m).
const CONTACT_STEP: f64 = 0.04;

fn obstacle_distance(world: &GroundTruthWorld, p: &Vec3) -> f64 {
    world
        .primitives
        .iter()
        .map(|b| b.shape.distance_sq(p))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Follows `from -> to` and stops at the last sampled point before the
/// vehicle would come within `radius` of a ground-truth obstacle, or closer
/// than it already is when it starts inside that radius.
fn contact_stop(world: &GroundTruthWorld, from: &Vec3, to: &Vec3, radius: f64) -> Vec3 {
    let limit = obstacle_distance(world, from).min(radius);
    let n = ((to - from).norm() / CONTACT_STEP).ceil().max(1.0) as usize;
    let mut last = *from;
    for i in 1..=n {
        let p = from + (to - from) * (i as f64 / n as f64);
        if obstacle_distance(world, &p) < limit {
            return last;
        }
        last = p;
    }
    *to
}

/// A running sense, fuse, record, plan, act loop.
///
/// Each step draws from one rng stream: the sensor first, then the planner.
/// Motion is a teleport to the planned pose, except that the simulated
/// vehicle cannot pass through ground-truth obstacles its map does not hold
/// yet: a motion ends where the vehicle would come within half a voxel of
/// one.
pub struct Mission {
    exp: Experiment,
    world: GroundTruthWorld,
    map: OctreeMap,
    pose: Pose,
    rng: ChaCha8Rng,
    eval_keys: Vec<VoxelKey>,
    initial_entropy: f64,
    records: Vec<StepRecord>,
    complete: bool,
    contacts: usize,
}

impl Mission {
    pub fn new(exp: Experiment) -> Result<Self> {
        let world = exp.scenario.world()?;
        let map = OctreeMap::new(exp.config.map.clone())?;
        let start = exp.scenario.start;
        if !exp.config.map.contains_point(&start.pos()) {
            return Err(Error::Config("start pose lies outside the map".into()));
        }
        if world.primitives.iter().any(|p| p.shape.contains(&start.pos())) {
            return Err(Error::Config("start pose lies inside an obstacle".into()));
        }
        let eval_keys = region_keys(map.params(), &exp.eval_bounds());
        let initial_entropy = total_entropy(&map, &eval_keys);
        let rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
        Ok(Self {
            exp,
            world,
            map,
            pose: start,
            rng,
            eval_keys,
            initial_entropy,
            records: Vec::new(),
            complete: false,
            contacts: 0,
        })
    }

    pub fn experiment(&self) -> &Experiment {
        &self.exp
    }

    pub fn map(&self) -> &OctreeMap {
        &self.map
    }

    pub fn world(&self) -> &GroundTruthWorld {
        &self.world
    }

    /// Pose the next scan will be taken from.
    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn initial_entropy(&self) -> f64 {
        self.initial_entropy
    }

    /// True once the planner reported that nothing is left to explore.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Planned motions cut short by ground-truth contact.
    pub fn contacts(&self) -> usize {
        self.contacts
    }

    /// True when no further step will run.
    pub fn is_finished(&self) -> bool {
        self.complete || self.records.len() >= self.exp.config.iterations
    }

    /// Runs one iteration. Returns `None` once the mission is finished.
    pub fn step(&mut self) -> Result<Option<&StepRecord>> {
        if self.is_finished() {
            return Ok(None);
        }
        let cfg = &self.exp.config;
        let camera = self.exp.camera();

        let t = Stopwatch::start();
        let cloud = generate_measurement(
            &self.world,
            &camera,
            &self.pose,
            &cfg.noise,
            self.exp.confusion(),
            &mut self.rng,
        );
        integrate_scan(&mut self.map, &self.pose, &cloud, cfg.noise.axial_scale)?;
        let fusion_ms = t.ms();

        let p_occ = cfg.planner.occupied_threshold;
        let mut record = StepRecord {
            step: self.records.len(),
            entropy: total_entropy(&self.map, &self.eval_keys),
            occupied: surface_coverage(&self.map, p_occ),
            per_class: per_class_coverage(&self.map, p_occ),
            plan_ms: 0.0,
            fusion_ms,
            pose: self.pose,
            best_gain: 0.0,
            tree_size: 0,
        };

        let t = Stopwatch::start();
        let report = plan_step(&self.map, &self.pose, &cfg.planner, &camera, &mut self.rng)?;
        record.plan_ms = t.ms();
        record.best_gain = report.best_gain;
        record.tree_size = report.tree_size;
        match report.outcome {
            PlanOutcome::Next(p) => {
                let target = p.pos();
                let body = 0.5 * cfg.map.resolution;
                let reached = contact_stop(&self.world, &self.pose.pos(), &target, body);
                if reached != target {
                    self.contacts += 1;
                }
                self.pose = Pose::new(reached, p.yaw);
            }
            PlanOutcome::Complete => self.complete = true,
        }
        self.records.push(record);
        Ok(self.records.last())
    }

    /// Steps until the budget runs out or exploration completes.
    pub fn run(&mut self) -> Result<()> {
        while self.step()?.is_some() {}
        Ok(())
    }

    pub fn summary(&self) -> Result<RunSummary> {
        run_averages(&self.records, self.initial_entropy)
    }

    /// Fraction of the reachable ground-truth surface the map holds as
    /// occupied, overall and per class.
    pub fn completeness(&self) -> Result<(f64, Vec<f64>)> {
        let grid = voxelize_ground_truth(&self.world, self.map.params())?;
        let surface = grid.surface_voxels();
        let p_occ = self.exp.config.planner.occupied_threshold;
        let overall = surface_completeness(&self.map, &surface, p_occ);
        let per_class = (0..self.exp.num_classes())
            .map(|c| {
                let keys: Vec<_> = surface.iter().copied().filter(|k| grid.label(*k) == Some(c)).collect();
                surface_completeness(&self.map, &keys, p_occ)
            })
            .collect();
        Ok((overall, per_class))
    }

    /// Writes `config.json`, `metrics.csv`, `timings.csv`, `map_dump.txt`
    /// and `summary.json` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<MissionSummary> {
        fs::create_dir_all(dir)?;
        let classes = &self.exp.scenario.classes;
        fs::write(dir.join("config.json"), self.exp.to_pretty_json()?)?;
        write_metrics_csv(
            BufWriter::new(File::create(dir.join("metrics.csv"))?),
            &self.records,
            self.initial_entropy,
            classes,
            &self.exp.config_hash(),
        )?;
        write_timings_csv(BufWriter::new(File::create(dir.join("timings.csv"))?), &self.records)?;
        write_dump(&self.map, classes, BufWriter::new(File::create(dir.join("map_dump.txt"))?))?;

        let summary = self.mission_summary()?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        Ok(summary)
    }

    pub fn mission_summary(&self) -> Result<MissionSummary> {
        let (surface_completeness, class_completeness) = self.completeness()?;
        Ok(MissionSummary {
            scenario: self.exp.scenario.name.clone(),
            gain_mode: self.exp.config.planner.gain_mode.to_string(),
            class_weights: self.exp.config.planner.class_weights.clone(),
            seed: self.exp.config.seed,
            config_hash: self.exp.config_hash(),
            exploration_complete: self.complete,
            contacts: self.contacts,
            averages: self.summary()?,
            surface_completeness,
            class_completeness,
            classes: self.exp.scenario.classes.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub scenario: String,
    pub gain_mode: String,
    pub class_weights: Vec<f64>,
    pub seed: u64,
    pub config_hash: String,
    /// The planner stopped before the iteration budget ran out.
    pub exploration_complete: bool,
    /// Planned motions cut short because the vehicle hit an obstacle the map
    /// did not contain yet.
    pub contacts: usize,
    pub averages: RunSummary,
    pub surface_completeness: f64,
    pub class_completeness: Vec<f64>,
    pub classes: Vec<String>,
}

/// Runs a full mission and writes its artifacts into `out_dir`.
pub fn run_mission(exp: Experiment, out_dir: &Path) -> Result<MissionSummary> {
    let mut mission = Mission::new(exp)?;
    mission.run()?;
    mission.write_artifacts(out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::world::LabeledPrimitive;

    fn world() -> GroundTruthWorld {
        let b = LabeledPrimitive { name: "b".into(), shape: Aabb::new([4.0, 0.0, 0.0], [5.0, 4.0, 4.0]), class_id: 0 };
        GroundTruthWorld::new(Aabb::new([0.0; 3], [8.0, 4.0, 4.0]), vec!["A".into()], vec![b]).unwrap()
    }

    #[test]
    fn motion_stops_before_contact() {
        let w = world();
        let from = Vec3::new(1.0, 2.0, 2.0);
        let stop = contact_stop(&w, &from, &Vec3::new(6.0, 2.0, 2.0), 0.5);
        assert!(stop.x <= 3.5 && stop.x > 3.5 - CONTACT_STEP);
        let free = Vec3::new(2.0, 3.0, 2.0);
        assert_eq!(contact_stop(&w, &from, &free, 0.5), free);
    }

    #[test]
    fn close_start_may_back_away_but_not_approach() {
        let w = world();
        let from = Vec3::new(3.8, 2.0, 2.0);
        let away = Vec3::new(2.0, 2.0, 2.0);
        assert_eq!(contact_stop(&w, &from, &away, 0.5), away);
        assert_eq!(contact_stop(&w, &from, &Vec3::new(3.9, 2.0, 2.0), 0.5), from);
    }
}
