//! Per-step evaluation quantities and run averages.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose};
use crate::map::{argmax, logit, MapParams, OctreeMap, VoxelKey};
use crate::world::GroundTruthGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Total occupancy entropy over the evaluation region (nats).
    pub entropy: f64,
    pub occupied: usize,
    pub per_class: Vec<usize>,
    pub plan_ms: f64,
    pub fusion_ms: f64,
    /// Pose the scan of this step was taken from.
    pub pose: Pose,
    pub best_gain: f64,
    pub tree_size: usize,
}

/// Keys of the voxels whose centers lie in `region` (closed box), in
/// lexicographic order.
pub fn region_keys(params: &MapParams, region: &Aabb) -> Vec<VoxelKey> {
    params.keys().filter(|k| region.contains(&params.center_of(*k))).collect()
}

/// Sum of occupancy entropies over `keys`; never-observed voxels count at
/// the prior.
pub fn total_entropy(map: &OctreeMap, keys: &[VoxelKey]) -> f64 {
    keys.iter().map(|k| map.entropy_occ(*k)).sum()
}

fn occupied_keys(map: &OctreeMap, p_occ: f64) -> impl Iterator<Item = VoxelKey> + '_ {
    let l = logit(p_occ);
    map.known_keys().iter().copied().filter(move |k| map.log_odds(*k) > l)
}

/// Number of voxels with occupancy above `p_occ`.
pub fn surface_coverage(map: &OctreeMap, p_occ: f64) -> usize {
    occupied_keys(map, p_occ).count()
}

/// Occupied voxels split by their most likely class (ties to the lowest
/// index).
pub fn per_class_coverage(map: &OctreeMap, p_occ: f64) -> Vec<usize> {
    let mut counts = vec![0; map.num_classes()];
    let mut probs = vec![0.0; map.num_classes()];
    for k in occupied_keys(map, p_occ) {
        map.class_probs_into(k, &mut probs);
        counts[argmax(&probs)] += 1;
    }
    counts
}

/// Fraction of `surface` voxels the map classifies as occupied.
pub fn surface_completeness(map: &OctreeMap, surface: &[VoxelKey], p_occ: f64) -> f64 {
    if surface.is_empty() {
        return 1.0;
    }
    let hit = surface.iter().filter(|k| map.occupancy_prob(**k) > p_occ).count();
    hit as f64 / surface.len() as f64
}

/// Ground-truth surface voxels of one class.
pub fn class_surface(grid: &GroundTruthGrid, class: usize) -> Vec<VoxelKey> {
    grid.surface_voxels().into_iter().filter(|k| grid.label(*k) == Some(class)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub initial_entropy: f64,
    pub final_entropy: f64,
    /// Mean entropy reduction per step (nats).
    pub avg_info_gain: f64,
    pub avg_occupied: f64,
    pub avg_per_class: Vec<f64>,
    pub avg_plan_ms: f64,
    pub avg_fusion_ms: f64,
}

/// Entropy reduction of each step, the first measured against
/// `initial_entropy`.
pub fn step_gains(records: &[StepRecord], initial_entropy: f64) -> Vec<f64> {
    let mut prev = initial_entropy;
    records
        .iter()
        .map(|r| {
            let g = prev - r.entropy;
            prev = r.entropy;
            g
        })
        .collect()
}

/// Column means over a run; `initial_entropy` is the entropy of the fresh map.
pub fn run_averages(records: &[StepRecord], initial_entropy: f64) -> Result<RunSummary> {
    if records.is_empty() {
        return Err(Error::Domain("run averages need at least one record".into()));
    }
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&StepRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let k = records[0].per_class.len();
    Ok(RunSummary {
        steps: records.len(),
        initial_entropy,
        final_entropy: records[records.len() - 1].entropy,
        avg_info_gain: step_gains(records, initial_entropy).iter().sum::<f64>() / n,
        avg_occupied: mean(&|r| r.occupied as f64),
        avg_per_class: (0..k).map(|c| mean(&|r| r.per_class[c] as f64)).collect(),
        avg_plan_ms: mean(&|r| r.plan_ms),
        avg_fusion_ms: mean(&|r| r.fusion_ms),
    })
}

fn class_column(name: &str) -> String {
    let slug: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    format!("occ_{slug}")
}

/// Writes the deterministic metrics table: a `# config_hash:` comment line,
/// a header, then one row per step. Timings are left out so that reruns
/// produce identical bytes; see [`write_timings_csv`].
pub fn write_metrics_csv<W: Write>(
    out: W,
    records: &[StepRecord],
    initial_entropy: f64,
    class_names: &[String],
    config_hash: &str,
) -> Result<()> {
    let mut out = out;
    writeln!(out, "# config_hash: {config_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["step", "entropy", "info_gain", "occupied"].map(String::from).to_vec();
    header.extend(class_names.iter().map(|c| class_column(c)));
    header.extend(["x", "y", "z", "yaw", "best_gain", "tree_size"].map(String::from));
    w.write_record(&header)?;

    for (r, gain) in records.iter().zip(step_gains(records, initial_entropy)) {
        let mut row = vec![
            r.step.to_string(),
            r.entropy.to_string(),
            gain.to_string(),
            r.occupied.to_string(),
        ];
        row.extend(r.per_class.iter().map(|c| c.to_string()));
        row.extend(r.pose.position.iter().map(|v| v.to_string()));
        row.push(r.pose.yaw.to_string());
        row.push(r.best_gain.to_string());
        row.push(r.tree_size.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv<W: Write>(out: W, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "plan_ms", "fusion_ms"])?;
    for r in records {
        w.write_record([r.step.to_string(), r.plan_ms.to_string(), r.fusion_ms.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
