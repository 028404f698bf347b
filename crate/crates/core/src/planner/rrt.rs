use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Aabb, Pose, Vec3};
use crate::map::{logit, OctreeMap};
use crate::world::CameraModel;

use super::gain::{node_gain, GainEvaluator};
use super::params::PlannerParams;
use super::visibility::{clearance, collision_free, for_each_visible};

#[derive(Debug, Clone, PartialEq)]
pub struct RrtNode {
    pub pose: Pose,
    pub parent: Option<usize>,
    /// Accumulated gain along the path from the root.
    pub gain: f64,
    /// Path length from the root (m).
    pub cost: f64,
    /// Distance to the nearest known-occupied voxel center, capped at the
    /// robot radius.
    pub clearance: f64,
}

/// Sum of per-voxel gains over the set visible from `pose`.
pub fn view_gain(map: &OctreeMap, pose: &Pose, params: &PlannerParams, camera: &CameraModel) -> f64 {
    let weights = params.weights(map.num_classes());
    let eval = GainEvaluator::new(map, params.gain_mode, &weights, params.negate_geometric_gain);
    visible_gain(map, pose, params, camera, &eval)
}

fn visible_gain(
    map: &OctreeMap,
    pose: &Pose,
    params: &PlannerParams,
    camera: &CameraModel,
    eval: &GainEvaluator<'_>,
) -> f64 {
    let gain_camera = camera.with_grid(params.gain_cols, params.gain_rows, params.gain_range);
    let mut sum = 0.0;
    for_each_visible(map, pose, &gain_camera, params.occupied_threshold, |v| sum += eval.gain(v.key));
    sum
}

fn sampling_box(map: &OctreeMap, params: &PlannerParams) -> Aabb {
    params.workspace.unwrap_or(map.params().bounds)
}

/// True iff the root voxel lies in the map and is not known-occupied.
fn root_valid(map: &OctreeMap, root: &Pose, occupied_threshold: f64) -> bool {
    match map.params().key_of(&root.pos()) {
        Ok(k) => map.log_odds(k) <= logit(occupied_threshold),
        Err(_) => false,
    }
}

/// Grows an RRT from `root` and scores every node by its accumulated gain.
///
/// Stops at `params.tree_nodes` nodes or after `params.max_samples` samples.
pub fn build_tree<R: Rng + ?Sized>(
    map: &OctreeMap,
    root: &Pose,
    params: &PlannerParams,
    camera: &CameraModel,
    rng: &mut R,
) -> Result<Vec<RrtNode>> {
    if !root_valid(map, root, params.occupied_threshold) {
        return Err(Error::InvalidRoot);
    }
    let weights = params.weights(map.num_classes());
    let eval = GainEvaluator::new(map, params.gain_mode, &weights, params.negate_geometric_gain);
    let ws = sampling_box(map, params);

    let (radius, p_occ) = (params.robot_radius, params.occupied_threshold);
    let mut tree = vec![RrtNode {
        pose: *root,
        parent: None,
        gain: 0.0,
        cost: 0.0,
        clearance: clearance(map, &root.pos(), radius, p_occ),
    }];
    for _ in 0..params.max_samples {
        if tree.len() >= params.tree_nodes {
            break;
        }
        let sample = Vec3::new(
            rng.random_range(ws.min[0]..ws.max[0]),
            rng.random_range(ws.min[1]..ws.max[1]),
            rng.random_range(ws.min[2]..ws.max[2]),
        );
        let yaw = wrap_angle(rng.random_range(-PI..PI));

        let (nearest, dist) = tree
            .iter()
            .enumerate()
            .map(|(i, n)| (i, (n.pose.pos() - sample).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if dist <= 0.0 {
            continue;
        }
        let from = tree[nearest].pose.pos();
        let to = if dist > params.step_length {
            from + (sample - from) * (params.step_length / dist)
        } else {
            sample
        };
        // A node already closer to an obstacle than the robot radius may only
        // extend along motions that do not get any closer.
        let allowed = tree[nearest].clearance.min(radius) * (1.0 - 1e-12);
        if !collision_free(map, &from, &to, allowed, p_occ) {
            continue;
        }
        let len = (to - from).norm();
        let pose = Pose::new(to, yaw);
        let s = visible_gain(map, &pose, params, camera, &eval);
        let parent = &tree[nearest];
        tree.push(RrtNode {
            pose,
            parent: Some(nearest),
            gain: node_gain(parent.gain, s, len, params.distance_weight),
            cost: parent.cost + len,
            clearance: clearance(map, &to, radius, p_occ),
        });
    }
    Ok(tree)
}

/// Index of the maximum-gain node; ties go to the lower index.
pub fn best_node(tree: &[RrtNode]) -> usize {
    let mut best = 0;
    for (i, n) in tree.iter().enumerate().skip(1) {
        if n.gain > tree[best].gain {
            best = i;
        }
    }
    best
}

/// First node after the root on the path from the root to `index`.
pub fn first_step(tree: &[RrtNode], mut index: usize) -> usize {
    while let Some(p) = tree[index].parent {
        if p == 0 {
            return index;
        }
        index = p;
    }
    index
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanOutcome {
    /// Move to this pose.
    Next(Pose),
    /// No tree found a node worth visiting.
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanReport {
    pub outcome: PlanOutcome,
    /// Best node of the last tree built.
    pub best_index: usize,
    pub best_gain: f64,
    pub tree_size: usize,
    /// Trees built, the first one included.
    pub attempts: usize,
}

/// One receding-horizon step: grow a tree, pick its best node, return the
/// first pose on the way there.
///
/// A tree whose best node is the root or scores below `gain_threshold` is
/// discarded and regrown, at most `max_retries` times, before reporting
/// [`PlanOutcome::Complete`].
pub fn plan_step<R: Rng + ?Sized>(
    map: &OctreeMap,
    current: &Pose,
    params: &PlannerParams,
    camera: &CameraModel,
    rng: &mut R,
) -> Result<PlanReport> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let tree = build_tree(map, current, params, camera, rng)?;
        let best = best_node(&tree);
        let best_gain = tree[best].gain;
        if best != 0 && best_gain >= params.gain_threshold {
            let step = first_step(&tree, best);
            return Ok(PlanReport {
                outcome: PlanOutcome::Next(tree[step].pose),
                best_index: best,
                best_gain,
                tree_size: tree.len(),
                attempts,
            });
        }
        if attempts > params.max_retries {
            return Ok(PlanReport {
                outcome: PlanOutcome::Complete,
                best_index: best,
                best_gain,
                tree_size: tree.len(),
                attempts,
            });
        }
    }
}
