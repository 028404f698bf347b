use std::fmt;
use std::fs::{self, File};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::planner::GainMode;

use super::config::Experiment;
use super::mission::{run_mission, MissionSummary};

/// A gain mode plus, for the semantic mode, the class weights to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModeSpec {
    Baseline,
    Geometric,
    /// Semantic gain with the weights from the config.
    Semantic,
    /// Semantic gain with equal class weights.
    SemanticUniform,
    /// Semantic gain with weight 0.6 on the named class and the remainder
    /// shared equally by the others.
    SemanticBias(String),
}

/// Weight placed on the favoured class by [`ModeSpec::SemanticBias`].
pub const BIAS_WEIGHT: f64 = 0.6;

impl ModeSpec {
    pub fn label(&self) -> String {
        match self {
            ModeSpec::Baseline => "baseline".into(),
            ModeSpec::Geometric => "geometric".into(),
            ModeSpec::Semantic => "semantic".into(),
            ModeSpec::SemanticUniform => "semantic-uniform".into(),
            ModeSpec::SemanticBias(c) => format!("semantic-bias:{c}"),
        }
    }

    /// `exp` with this mode's gain and weights applied.
    pub fn apply(&self, exp: &Experiment) -> Result<Experiment> {
        let mut cfg = exp.config.clone();
        let k = exp.num_classes();
        let p = &mut cfg.planner;
        match self {
            ModeSpec::Baseline => p.gain_mode = GainMode::BaselineUnknownCount,
            ModeSpec::Geometric => p.gain_mode = GainMode::GeometricEntropy,
            ModeSpec::Semantic => p.gain_mode = GainMode::SemanticWeighted,
            ModeSpec::SemanticUniform => {
                p.gain_mode = GainMode::SemanticWeighted;
                p.class_weights = vec![1.0 / k as f64; k];
            }
            ModeSpec::SemanticBias(class) => {
                let target = exp
                    .scenario
                    .classes
                    .iter()
                    .position(|c| c.eq_ignore_ascii_case(class))
                    .ok_or_else(|| Error::Config(format!("scenario has no class '{class}'")))?;
                if k < 2 {
                    return Err(Error::Config("a biased mode needs at least two classes".into()));
                }
                let rest = (1.0 - BIAS_WEIGHT) / (k - 1) as f64;
                p.gain_mode = GainMode::SemanticWeighted;
                p.class_weights = (0..k).map(|i| if i == target { BIAS_WEIGHT } else { rest }).collect();
            }
        }
        Experiment::new(cfg, exp.scenario.clone())
    }
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ModeSpec {
    type Err = Error;

    /// Accepts `baseline`, `geometric`, `semantic`, `semantic-uniform`,
    /// `semantic-bias:<class>` and `semantic-vessel` (bias towards `Ship`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(class) = s.strip_prefix("semantic-bias:") {
            return Ok(ModeSpec::SemanticBias(class.to_string()));
        }
        match s.to_ascii_lowercase().as_str() {
            "semantic-uniform" => Ok(ModeSpec::SemanticUniform),
            "semantic-vessel" => Ok(ModeSpec::SemanticBias("Ship".into())),
            other => Ok(match other.parse::<GainMode>()? {
                GainMode::BaselineUnknownCount => ModeSpec::Baseline,
                GainMode::GeometricEntropy => ModeSpec::Geometric,
                GainMode::SemanticWeighted => ModeSpec::Semantic,
            }),
        }
    }
}

/// Seed-averaged results of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub mode: String,
    pub runs: usize,
    pub avg_info_gain: f64,
    pub avg_occupied: f64,
    pub avg_per_class: Vec<f64>,
    pub surface_completeness: f64,
    pub avg_plan_ms: f64,
    pub avg_fusion_ms: f64,
}

impl ComparisonRow {
    /// Means over `runs`, which must be non-empty.
    pub fn from_runs(mode: &str, runs: &[MissionSummary]) -> Self {
        let n = runs.len() as f64;
        let mean = |f: &dyn Fn(&MissionSummary) -> f64| runs.iter().map(f).sum::<f64>() / n;
        let k = runs[0].averages.avg_per_class.len();
        Self {
            mode: mode.to_string(),
            runs: runs.len(),
            avg_info_gain: mean(&|r| r.averages.avg_info_gain),
            avg_occupied: mean(&|r| r.averages.avg_occupied),
            avg_per_class: (0..k).map(|c| mean(&|r| r.averages.avg_per_class[c])).collect(),
            surface_completeness: mean(&|r| r.surface_completeness),
            avg_plan_ms: mean(&|r| r.averages.avg_plan_ms),
            avg_fusion_ms: mean(&|r| r.averages.avg_fusion_ms),
        }
    }
}

fn write_comparison(path: &Path, rows: &[ComparisonRow], classes: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    let mut header: Vec<String> = ["mode", "runs", "avg_info_gain", "avg_occupied"].map(String::from).to_vec();
    header.extend(classes.iter().map(|c| format!("avg_occ_{c}")));
    header.extend(["surface_completeness", "avg_plan_ms", "avg_fusion_ms"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.mode.clone(), r.runs.to_string(), r.avg_info_gain.to_string(), r.avg_occupied.to_string()];
        row.extend(r.avg_per_class.iter().map(|v| v.to_string()));
        row.extend([r.surface_completeness, r.avg_plan_ms, r.avg_fusion_ms].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every (mode, seed) pair and writes `comparison.csv` with one
/// seed-averaged row per mode. Each run's artifacts go to
/// `<out_dir>/<mode>/seed_<seed>/`.
///
/// If a run fails, the table is still written for the modes whose runs all
/// finished, and the error is returned.
pub fn compare_runs(exp: &Experiment, modes: &[ModeSpec], seeds: &[u64], out_dir: &Path) -> Result<Vec<ComparisonRow>> {
    if modes.is_empty() || seeds.is_empty() {
        return Err(Error::Config("compare needs at least one mode and one seed".into()));
    }
    fs::create_dir_all(out_dir)?;
    let classes = &exp.scenario.classes;
    let mut rows = Vec::new();
    for mode in modes {
        let base = mode.apply(exp)?;
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut e = base.clone();
            e.config.seed = seed;
            let dir = out_dir.join(mode.label().replace(':', "_")).join(format!("seed_{seed}"));
            match run_mission(e, &dir) {
                Ok(s) => runs.push(s),
                Err(err) => {
                    write_comparison(&out_dir.join("comparison.csv"), &rows, classes)?;
                    return Err(err);
                }
            }
        }
        rows.push(ComparisonRow::from_runs(&mode.label(), &runs));
    }
    write_comparison(&out_dir.join("comparison.csv"), &rows, classes)?;
    Ok(rows)
}
