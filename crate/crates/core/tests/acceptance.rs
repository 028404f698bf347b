//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances and budgets are fixed here.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volsem::geometry::{Aabb, Vec3};
use volsem::map::{
    endpoint_hit_probability, raycast_traverse, MapParams, OctreeMap, VoxelKey, MAX_HIT_PROBABILITY,
};
use volsem::metrics::{step_gains, surface_completeness};
use volsem::planner::{node_gain, plan_step, voxel_gain, GainMode};
use volsem::runner::{run_mission, Experiment, ExperimentConfig, Mission, ModeSpec};
use volsem::sensor::NoiseModel;
use volsem::world::{voxelize_ground_truth, Scenario};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    Scenario::load(path).expect("bundled scenario loads")
}

fn experiment(scenario_file: &str, json: &str) -> Experiment {
    let cfg = ExperimentConfig::from_json(json).expect("config parses");
    Experiment::new(cfg, scenario(scenario_file)).expect("config resolves")
}

fn unit_map(max: f64, resolution: f64) -> OctreeMap {
    OctreeMap::new(MapParams {
        resolution,
        bounds: Aabb::new([0.0; 3], [max; 3]),
        ..MapParams::default()
    })
    .unwrap()
}

/// Log-odds fusion against the normalized Bayes product in probability space.
fn fusion_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut map = unit_map(4.0, 0.4);
    let key = VoxelKey::new(1, 1, 1);
    let clamp = map.params().log_odds_max;
    let mut worst = 0.0f64;
    let mut sequences = 0;
    while sequences < 200 {
        let n = rng.random_range(1..=10);
        let ps: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
        // keep only sequences whose running log-odds never reach the clamp
        let mut l = 0.0f64;
        if ps.iter().any(|p| {
            l += (p / (1.0 - p)).ln();
            l.abs() >= clamp
        }) {
            continue;
        }
        sequences += 1;
        map = OctreeMap::new(map.params().clone()).unwrap();
        for p in &ps {
            map.update_occupancy(key, *p).unwrap();
        }
        let occ: f64 = ps.iter().product();
        let free: f64 = ps.iter().map(|p| 1.0 - p).product();
        worst = worst.max((map.occupancy_prob(key) - occ / (occ + free)).abs());
    }
    let elapsed = t.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("max |diff| {worst:.2e} (tol 1e-9) over 200 sequences in {elapsed:.2?} (limit 1 s)"),
    )
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Probability mass of N(0, sigma) within +-half_width, by quadrature.
fn normal_mass(sigma: f64, half_width: f64) -> f64 {
    let pdf = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    simpson(pdf, -half_width, half_width, 2000)
}

fn endpoint_model() -> Outcome {
    let p = endpoint_hit_probability(10.0, 0.005, 0.4).unwrap();
    let oracle = normal_mass(0.005 * 100.0, 0.2);
    let value_ok = (p - oracle).abs() <= 1e-5 && (p - 0.31084).abs() <= 1e-5;

    let ranges: Vec<f64> = (0..100).map(|i| 0.5 + 0.2 * i as f64).collect();
    let values: Vec<f64> = ranges.iter().map(|z| endpoint_hit_probability(*z, 0.005, 0.4).unwrap()).collect();
    let monotone = values.windows(2).all(|w| {
        // strictly decreasing wherever the value is not saturated
        w[1] <= w[0] && (w[0] >= MAX_HIT_PROBABILITY || w[1] < w[0])
    });
    check(
        value_ok && monotone,
        format!(
            "P(10, 0.005, 0.4) = {p:.6}, quadrature {oracle:.6} (tol 1e-5); decreasing over 100-point sweep: {monotone}"
        ),
    )
}

fn semantic_fusion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut floor_ok = true;
    for _ in 0..1000 {
        let mut map = unit_map(2.0, 0.4);
        let key = VoxelKey::new(2, 2, 2);
        for _ in 0..rng.random_range(1..=20) {
            let raw: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
            let s: f64 = raw.iter().sum();
            if s <= 0.0 {
                continue;
            }
            map.update_semantics(key, &raw.iter().map(|v| v / s).collect::<Vec<_>>()).unwrap();
        }
        let dist = map.class_distribution(key);
        worst = worst.max((dist.iter().sum::<f64>() - 1.0).abs());
        floor_ok &= dist.iter().all(|p| *p >= map.params().class_floor * (1.0 - 1e-9));
    }

    let m = [0.6, 0.1, 0.1, 0.1, 0.1];
    let mut map = unit_map(2.0, 0.4);
    let key = VoxelKey::new(0, 0, 0);
    map.update_semantics(key, &m).unwrap();
    let first = map.class_distribution(key);
    map.update_semantics(key, &m).unwrap();
    let second = map.class_distribution(key);
    // hand Bayes product: (0.36, 0.01, 0.01, 0.01, 0.01) / 0.4
    let expected = [0.9, 0.025, 0.025, 0.025, 0.025];
    let err1 = first.iter().zip(m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let err2 = second.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        worst <= 1e-9 && floor_ok && err1 <= 1e-9 && err2 <= 1e-9,
        format!(
            "max |sum-1| {worst:.2e} over 1000 sequences, floor held: {floor_ok}; examples off by {err1:.1e}, {err2:.1e} (tol 1e-9)"
        ),
    )
}

/// Liang-Barsky clip of `a -> b` against a box, with a small slack.
fn segment_meets_box(a: &Vec3, b: &Vec3, lo: &Vec3, hi: &Vec3, slack: f64) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..3 {
        let (l, h) = (lo[i] - slack, hi[i] + slack);
        if d[i].abs() < 1e-15 {
            if a[i] < l || a[i] > h {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((l - a[i]) / d[i], (h - a[i]) / d[i]);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

fn ray_traversal() -> Outcome {
    let t = Instant::now();
    let params = MapParams { resolution: 0.4, bounds: Aabb::new([0.0; 3], [25.6; 3]), ..MapParams::default() };
    let delta = params.resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut missing, mut stray) = (0usize, 0usize);
    for _ in 0..1000 {
        let mut point = || Vec3::new(rng.random_range(0.0..25.6), rng.random_range(0.0..25.6), rng.random_range(0.0..25.6));
        let (a, b) = (point(), point());
        let mut cells = raycast_traverse(&a, &b, &params);
        cells.push(params.key_of(&b).unwrap());
        let steps = ((b - a).norm() / (delta / 10.0)).ceil() as usize;
        for i in 0..=steps {
            let p = a + (b - a) * (i as f64 / steps as f64);
            if !cells.contains(&params.key_of(&p).unwrap()) {
                missing += 1;
            }
        }
        for k in &cells {
            let bx = params.voxel_box(*k);
            if !segment_meets_box(&a, &b, &bx.min_v(), &bx.max_v(), 1e-9) {
                stray += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    check(
        missing == 0 && stray == 0 && elapsed < Duration::from_secs(5),
        format!("{missing} oracle samples outside traversal, {stray} cells off the segment, {elapsed:.2?} (limit 5 s)"),
    )
}

fn gain_formulas() -> Outcome {
    let map = unit_map(2.0, 0.4);
    let key = VoxelKey::new(1, 1, 1);
    let w = [0.2; 5];
    let g = |mode| voxel_gain(&map, key, mode, &w, false);
    let values = [
        (g(GainMode::BaselineUnknownCount), 1.0),
        (g(GainMode::GeometricEntropy), 0.34657),
        (g(GainMode::SemanticWeighted), 0.11156),
        (node_gain(0.0, 100.0, 2.0, 0.5), 36.788),
    ];
    let worst = values.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        worst <= 1e-4,
        format!(
            "baseline {:.5}, geometric {:.5}, semantic {:.5}, node gain {:.4}; max error {worst:.1e} (tol 1e-4)",
            values[0].0, values[1].0, values[2].0, values[3].0
        ),
    )
}

fn exploration_completeness() -> Outcome {
    let t = Instant::now();
    let budget = 800;
    let mut reached = Vec::new();
    for seed in 1..=5u64 {
        let exp = experiment(
            "mini_room.json",
            &format!(
                r#"{{ "scenario": "mini_room.json", "noise": {{ "axial_scale": 0.005 }},
                    "planner": {{ "gain_mode": "geometric_entropy", "occupied_threshold": 0.7 }},
                    "iterations": {budget}, "seed": {seed} }}"#
            ),
        );
        let grid = voxelize_ground_truth(&exp.scenario.world().unwrap(), &exp.config.map).unwrap();
        let surface = grid.surface_voxels();
        let mut mission = Mission::new(exp).unwrap();
        let mut hit_at = None;
        while let Some(rec) = mission.step().unwrap() {
            let step = rec.step;
            if surface_completeness(mission.map(), &surface, 0.7) >= 0.95 {
                hit_at = Some(step + 1);
                break;
            }
        }
        reached.push(hit_at);
    }
    let elapsed = t.elapsed();
    let ok = reached.iter().filter(|r| r.is_some()).count();
    check(
        ok >= 4 && elapsed < Duration::from_secs(180),
        format!("95% surface reached by {ok}/5 seeds (need 4), iterations {reached:?}, {elapsed:.1?} (limit 3 min)"),
    )
}

fn semantic_bias_direction() -> Outcome {
    let budget = 300;
    let checkpoint = budget / 2;
    let base = experiment(
        "mini_shipyard.json",
        &format!(
            r#"{{ "scenario": "mini_shipyard.json", "noise": {{ "axial_scale": 0.005 }},
                "confusion": {{ "diagonal": 0.9, "num_classes": 5 }}, "iterations": {budget} }}"#
        ),
    );
    let ship = base.scenario.classes.iter().position(|c| c == "Ship").unwrap();
    let mean = |weights: [f64; 5]| {
        let mut total = 0.0;
        for seed in 1..=5u64 {
            let mut e = ModeSpec::Semantic.apply(&base).unwrap();
            e.config.planner.class_weights = weights.to_vec();
            e.config.seed = seed;
            let mut mission = Mission::new(e).unwrap();
            for _ in 0..checkpoint {
                mission.step().unwrap();
            }
            total += mission.records().last().unwrap().per_class[ship] as f64;
        }
        total / 5.0
    };
    let uniform = mean([0.2; 5]);
    let biased = mean([0.1, 0.1, 0.6, 0.1, 0.1]);
    check(
        biased > uniform,
        format!("mean Ship-class occupied voxels at step {checkpoint}/{budget}: biased {biased:.1} vs uniform {uniform:.1} (need strictly higher)"),
    )
}

fn entropy_decay() -> Outcome {
    let mut increases = Vec::new();
    let mut worst_telescope = 0.0f64;
    for mode in GainMode::ALL {
        let mut exp = experiment(
            "mini_room.json",
            r#"{ "scenario": "mini_room.json", "iterations": 120, "seed": 8 }"#,
        );
        exp.config.noise = NoiseModel::noiseless();
        exp.config.planner.gain_mode = mode;
        let mut mission = Mission::new(exp).unwrap();
        mission.run().unwrap();
        let h0 = mission.initial_entropy();
        let recs = mission.records();
        let gains = step_gains(recs, h0);
        increases.push(gains.iter().filter(|g| **g < 0.0).count());
        let telescoped: f64 = gains.iter().sum();
        let direct = h0 - recs.last().unwrap().entropy;
        worst_telescope = worst_telescope.max((telescoped - direct).abs() / h0);
    }
    check(
        increases.iter().all(|n| *n == 0) && worst_telescope <= 1e-12,
        format!(
            "steps with rising entropy per mode {increases:?} (need 0); telescoping rel. error {worst_telescope:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{ "scenario": "mini_room.json", "iterations": 40, "seed": 11 }"#;
    let mut same = true;
    let mut sizes = Vec::new();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_mission(experiment("mini_room.json", json), &a).unwrap();
    run_mission(experiment("mini_room.json", json), &b).unwrap();
    for f in ["metrics.csv", "map_dump.txt"] {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        sizes.push(x.len());
        same &= x == y;
    }
    check(same, format!("metrics.csv and map_dump.txt byte-identical across two runs: {same} (sizes {sizes:?})"))
}

fn mode_agreement() -> Outcome {
    let exp = experiment("mini_room.json", r#"{ "scenario": "mini_room.json" }"#);
    let map = OctreeMap::new(exp.config.map.clone()).unwrap();
    let picks: Vec<usize> = GainMode::ALL
        .iter()
        .map(|mode| {
            let mut planner = exp.config.planner.clone();
            planner.gain_mode = *mode;
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            plan_step(&map, &exp.scenario.start, &planner, &exp.camera(), &mut rng).unwrap().best_index
        })
        .collect();
    check(
        picks.windows(2).all(|w| w[0] == w[1]),
        format!("best node index per mode (baseline, geometric, semantic): {picks:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fusion matches Bayes product", fusion_oracle),
        ("endpoint hit probability", endpoint_model),
        ("semantic fusion closure and examples", semantic_fusion),
        ("ray traversal covers the segment", ray_traversal),
        ("gain reference values", gain_formulas),
        ("exploration completeness (mini-room)", exploration_completeness),
        ("semantic bias direction (mini-shipyard)", semantic_bias_direction),
        ("entropy decay in noiseless runs", entropy_decay),
        ("determinism", determinism),
        ("mode agreement on an unknown map", mode_agreement),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        println!("[{}] {:>2}. {name}: {}", if out.pass { "PASS" } else { "FAIL" }, i + 1, out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }

    println!("acceptance: {} passed, {} failed {:?}", criteria.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
