//! Fixed-depth octree holding per-voxel occupancy log-odds and class
//! distributions.
//!
//! The tree spans a cube of `2^depth` cells per side anchored at the lower
//! map corner, with `depth = ceil(log2(max axis cells))`. Inner nodes only
//! route; payloads live in flat per-slot arrays addressed by the leaves, and
//! the slot list doubles as the index of every voxel that has been touched.
//! Voxels that were never updated are not stored and read back as the prior.

use crate::error::{Error, Result};

use super::params::{logistic, logit, MapParams, OccupancyEntropy, VoxelKey};

/// Payload of one voxel: occupancy log-odds and class log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVoxel {
    pub occ_log_odds: f64,
    pub class_log_probs: Vec<f64>,
}

impl SemanticVoxel {
    pub fn occupancy(&self) -> f64 {
        logistic(self.occ_log_odds)
    }

    pub fn class_probs(&self) -> Vec<f64> {
        self.class_log_probs.iter().map(|l| l.exp()).collect()
    }
}

const EMPTY: u32 = 0;
const MAX_CLASSES: usize = 64;

#[derive(Debug, Clone)]
pub struct OctreeMap {
    params: MapParams,
    depth: u32,
    /// Node 0 is the root. In nodes of the last inner level, children hold
    /// `slot + 1`; elsewhere they hold a node index. `EMPTY` marks absence.
    nodes: Vec<[u32; 8]>,
    keys: Vec<VoxelKey>,
    log_odds: Vec<f64>,
    class_log: Vec<f64>,
    prior_log_odds: f64,
    uniform_log: f64,
}

impl OctreeMap {
    pub fn new(params: MapParams) -> Result<Self> {
        params.validate()?;
        if params.num_classes > MAX_CLASSES {
            return Err(Error::InvalidParams(format!(
                "at most {MAX_CLASSES} classes are supported"
            )));
        }
        let max_cells = params.dims().into_iter().max().unwrap_or(1).max(2);
        let depth = u32::BITS - (max_cells - 1).leading_zeros();
        Ok(Self {
            depth,
            nodes: vec![[EMPTY; 8]],
            keys: Vec::new(),
            log_odds: Vec::new(),
            class_log: Vec::new(),
            prior_log_odds: params.prior_log_odds(),
            uniform_log: -(params.num_classes as f64).ln(),
            params,
        })
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn num_classes(&self) -> usize {
        self.params.num_classes
    }

    /// Number of voxels that have received at least one update.
    pub fn known_count(&self) -> usize {
        self.keys.len()
    }

    /// Keys of all stored voxels, in insertion order.
    pub fn known_keys(&self) -> &[VoxelKey] {
        &self.keys
    }

    #[inline]
    fn child_index(key: VoxelKey, level: u32) -> usize {
        (((key.ix >> level) & 1) | (((key.iy >> level) & 1) << 1) | (((key.iz >> level) & 1) << 2))
            as usize
    }

    #[inline]
    fn slot(&self, key: VoxelKey) -> Option<usize> {
        let mut node = 0usize;
        for level in (1..self.depth).rev() {
            let next = self.nodes[node][Self::child_index(key, level)];
            if next == EMPTY {
                return None;
            }
            node = next as usize;
        }
        match self.nodes[node][Self::child_index(key, 0)] {
            EMPTY => None,
            s => Some(s as usize - 1),
        }
    }

    fn slot_or_insert(&mut self, key: VoxelKey) -> Result<usize> {
        if !self.params.contains_key(key) {
            return Err(Error::KeyOutOfBounds(key));
        }
        let mut node = 0usize;
        for level in (1..self.depth).rev() {
            let c = Self::child_index(key, level);
            let next = self.nodes[node][c];
            node = if next == EMPTY {
                self.nodes.push([EMPTY; 8]);
                let id = self.nodes.len() - 1;
                self.nodes[node][c] = id as u32;
                id
            } else {
                next as usize
            };
        }
        let c = Self::child_index(key, 0);
        let s = self.nodes[node][c];
        if s != EMPTY {
            return Ok(s as usize - 1);
        }
        let slot = self.keys.len();
        self.nodes[node][c] = slot as u32 + 1;
        self.keys.push(key);
        self.log_odds.push(self.prior_log_odds);
        self.class_log
            .extend(std::iter::repeat_n(self.uniform_log, self.params.num_classes));
        Ok(slot)
    }

    /// Stored log-odds and class log-probabilities, or `None` for a voxel that
    /// was never updated.
    #[inline]
    pub fn raw(&self, key: VoxelKey) -> Option<(f64, &[f64])> {
        let k = self.params.num_classes;
        self.slot(key)
            .map(|s| (self.log_odds[s], &self.class_log[s * k..(s + 1) * k]))
    }

    pub fn is_stored(&self, key: VoxelKey) -> bool {
        self.slot(key).is_some()
    }

    pub fn voxel(&self, key: VoxelKey) -> SemanticVoxel {
        let k = self.params.num_classes;
        match self.slot(key) {
            Some(s) => SemanticVoxel {
                occ_log_odds: self.log_odds[s],
                class_log_probs: self.class_log[s * k..(s + 1) * k].to_vec(),
            },
            None => SemanticVoxel {
                occ_log_odds: self.prior_log_odds,
                class_log_probs: vec![self.uniform_log; k],
            },
        }
    }

    #[inline]
    pub fn log_odds(&self, key: VoxelKey) -> f64 {
        self.slot(key)
            .map_or(self.prior_log_odds, |s| self.log_odds[s])
    }

    #[inline]
    pub fn occupancy_prob(&self, key: VoxelKey) -> f64 {
        logistic(self.log_odds(key))
    }

    pub fn is_unknown(&self, key: VoxelKey) -> bool {
        (self.occupancy_prob(key) - 0.5).abs() < self.params.unknown_epsilon
    }

    pub fn class_distribution(&self, key: VoxelKey) -> Vec<f64> {
        let mut out = vec![0.0; self.params.num_classes];
        self.class_probs_into(key, &mut out);
        out
    }

    /// Writes the class distribution of `key` into `out` (length `num_classes`).
    #[inline]
    pub fn class_probs_into(&self, key: VoxelKey, out: &mut [f64]) {
        let k = self.params.num_classes;
        match self.slot(key) {
            Some(s) => {
                for (o, l) in out.iter_mut().zip(&self.class_log[s * k..(s + 1) * k]) {
                    *o = l.exp();
                }
            }
            None => out.fill(1.0 / k as f64),
        }
    }

    /// Index of the most likely class; ties go to the lowest index.
    pub fn argmax_class(&self, key: VoxelKey) -> usize {
        let k = self.params.num_classes;
        match self.slot(key) {
            Some(s) => argmax(&self.class_log[s * k..(s + 1) * k]),
            None => 0,
        }
    }

    /// Adds the log-odds of `p_hit` to the voxel, clamped to the configured
    /// bounds, and returns the new log-odds. Class estimates are untouched.
    pub fn update_occupancy(&mut self, key: VoxelKey, p_hit: f64) -> Result<f64> {
        if !(p_hit > 0.0 && p_hit < 1.0) {
            return Err(Error::DegenerateProbability(p_hit));
        }
        self.add_log_odds(key, logit(p_hit))
    }

    pub(crate) fn add_log_odds(&mut self, key: VoxelKey, delta: f64) -> Result<f64> {
        let s = self.slot_or_insert(key)?;
        let l = (self.log_odds[s] + delta).clamp(self.params.log_odds_min, self.params.log_odds_max);
        self.log_odds[s] = l;
        Ok(l)
    }

    /// Multiplies the voxel's class distribution by the measured one and
    /// renormalizes. Both factors are floored at `class_floor` first, and the
    /// posterior is floored again, so no class ever reaches zero.
    pub fn update_semantics(&mut self, key: VoxelKey, measurement: &[f64]) -> Result<()> {
        let k = self.params.num_classes;
        if measurement.len() != k {
            return Err(Error::Domain(format!(
                "class distribution has {} entries, expected {k}",
                measurement.len()
            )));
        }
        let total: f64 = measurement.iter().sum();
        if measurement.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(
                "class distribution must be non-negative and sum to 1".into(),
            ));
        }
        let floor = self.params.class_floor;
        let s = self.slot_or_insert(key)?;
        let stored = &mut self.class_log[s * k..(s + 1) * k];

        let mut post = [0.0f64; MAX_CLASSES];
        let post = &mut post[..k];
        let mut norm = 0.0;
        for ((p, l), m) in post.iter_mut().zip(stored.iter()).zip(measurement) {
            *p = l.exp().max(floor) * m.max(floor);
            norm += *p;
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateUpdate);
        }
        post.iter_mut().for_each(|p| *p /= norm);
        floor_simplex(post, floor);
        for (l, p) in stored.iter_mut().zip(post.iter()) {
            *l = p.ln();
        }
        Ok(())
    }

    /// Occupancy entropy of one voxel.
    pub fn entropy_occ(&self, key: VoxelKey) -> f64 {
        occupancy_entropy(self.occupancy_prob(key), self.params.entropy)
    }

    /// `-P_k ln P_k` for class `k` (zero-based).
    pub fn entropy_sem_class(&self, key: VoxelKey, class: usize) -> f64 {
        let k = self.params.num_classes;
        let p = match self.slot(key) {
            Some(s) => self.class_log[s * k + class].exp(),
            None => 1.0 / k as f64,
        };
        plogp(p)
    }

    /// Sum of the per-class entropies.
    pub fn entropy_sem(&self, key: VoxelKey) -> f64 {
        (0..self.params.num_classes)
            .map(|c| self.entropy_sem_class(key, c))
            .sum()
    }
}

/// `-p ln p`, with the limit value 0 at `p = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

#[inline]
pub fn occupancy_entropy(p: f64, form: OccupancyEntropy) -> f64 {
    match form {
        OccupancyEntropy::SingleTerm => plogp(p),
        OccupancyEntropy::Binary => plogp(p) + plogp(1.0 - p),
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Raises every entry of a normalized distribution to at least `floor` while
/// keeping the sum at one. Mass is taken proportionally from entries above
/// the floor.
pub fn floor_simplex(p: &mut [f64], floor: f64) {
    if floor <= 0.0 || p.is_empty() {
        return;
    }
    let k = p.len();
    let mut clamped = 0u64;
    loop {
        let n_clamped = clamped.count_ones() as f64;
        let free_mass = 1.0 - n_clamped * floor;
        let rest: f64 = (0..k).filter(|i| clamped & (1 << i) == 0).map(|i| p[i]).sum();
        if rest <= 0.0 {
            p.fill(1.0 / k as f64);
            return;
        }
        let scale = free_mass / rest;
        let mut changed = false;
        for i in 0..k {
            if clamped & (1 << i) == 0 && p[i] * scale < floor {
                clamped |= 1 << i;
                changed = true;
            }
        }
        if !changed {
            for (i, v) in p.iter_mut().enumerate() {
                *v = if clamped & (1 << i) != 0 { floor } else { *v * scale };
            }
            return;
        }
    }
}
