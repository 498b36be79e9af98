//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines always print.
//!
//!     cargo test --release --test acceptance

mod common;

use advscen::adversary::loss::{expert_future, COLLISION_STEP_COST, JERK_THRESHOLD};
use advscen::adversary::optim::{BanditParams, BoParams, GaParams, NesParams, RsParams};
use advscen::adversary::{adversarial_loss, attack, evaluate_reduced, optimize_fn, Algorithm, AttackConfig, ObjectiveMask, OptimizerParams};
use advscen::autonomy::{detect, run_stack, CostWeights, PlannerInput, StackKind};
use advscen::feasibility::{is_plausible, perturbed_trajectory, project_index, select_and_sample, FeasibleSet, DEFAULT_N_SAMPLE};
use advscen::kinematics::{check_bounds, rollout, BicycleState, Control, ControlSequence, Perturbation, PhysicalBounds};
use advscen::scenario::geometry::{OrientedBox, Vec2};
use advscen::scenario::{HdMap, RandomSource, Scenario, Trajectory};
use advscen::sensorsim::{merge_min, render_frame, LidarConfig, RangeImage, SensorSimulator, Tag};
use advscen::toy;
use common::regression;
use rand::Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 1

fn c1_kinematics() -> Outcome {
    let b = PhysicalBounds::default();
    let dt = 0.5;
    let mut rng = RandomSource::new(1).rng();
    let mut worst_lat: f64 = 0.0;
    for _ in 0..200 {
        let theta = rng.random_range(-3.1..3.1);
        let s0 = BicycleState::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), theta, rng.random_range(0.0..15.0), 0.0, 0.0);
        let controls: Vec<Control> = (0..20).map(|_| Control::new(rng.random_range(-2.0..2.0), 0.0)).collect();
        let r = ok(rollout(&s0, &ControlSequence(controls), dt, &b))?;
        let (u, n) = (Vec2::from_angle(theta), Vec2::from_angle(theta).perp());
        for s in &r.trajectory.states {
            let d = s.position() - s0.position();
            worst_lat = worst_lat.max(d.dot(n).abs());
            ensure!(d.dot(u) >= -1e-9, "straight rollout moved backwards");
        }
    }
    ensure!(worst_lat < 1e-9, "straight-line lateral deviation {worst_lat:e} m");

    // Constant curvature at constant speed: each explicit step is a chord
    // turning by phi = kappa v dt, so the states sit on the circle of radius
    // 1/kappa through the start whose center is rotated back by phi / 2.
    let mut worst_rel: f64 = 0.0;
    for &(v, kappa, steps) in &[(2.0, 0.1, 40), (5.0, 0.05, 10), (8.0, 0.04, 10), (10.0, 0.02, 10), (3.0, 0.2, 10), (12.0, 0.02, 10)] {
        let s0 = BicycleState::new(0.0, 0.0, 0.0, v, kappa, 0.0);
        let r = ok(rollout(&s0, &ControlSequence::constant(steps, Control::default()), dt, &b))?;
        ensure!(r.clamp_events == 0, "v={v} kappa={kappa} clamped");
        let radius = 1.0 / kappa;
        let half = 0.5 * kappa * v * dt;
        let center = Vec2::new(radius * half.sin(), radius * half.cos());
        for s in &r.trajectory.states {
            worst_rel = worst_rel.max((s.position().distance(center) - radius).abs() / radius);
            ensure!((s.kappa - kappa).abs() < 1e-12 && (s.v - v).abs() < 1e-12, "state drifted");
        }
        let end = r.trajectory.states.last().unwrap();
        let turned = kappa * v * dt * steps as f64;
        ensure!((end.theta - turned).abs() < 1e-9, "heading {} vs {turned}", end.theta);
    }
    ensure!(worst_rel < 0.02, "arc chord error {:.3}%", 100.0 * worst_rel);
    Ok(format!("lateral {worst_lat:.1e} m, arc error {:.3}%", 100.0 * worst_rel))
}

// ---------------------------------------------------------------- 2

/// Nearest member by an independent summed squared-distance scan.
fn scan_nearest(t: &Trajectory, set: &FeasibleSet) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, m) in set.trajectories.iter().enumerate() {
        let mut d = 0.0;
        for k in 0..t.len() {
            let (dx, dy) = (t.states[k].x - m.states[k].x, t.states[k].y - m.states[k].y);
            d += dx * dx + dy * dy;
        }
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn c2_feasibility() -> Outcome {
    let b = PhysicalBounds::default();
    let (mut scenes, mut members, mut projections) = (0, 0, 0);
    for seed in 0..20u64 {
        let sc = toy::random_scene(&RandomSource::new(1000 + seed), 4);
        let sets = match select_and_sample(&sc, 1, DEFAULT_N_SAMPLE, &RandomSource::new(seed), &b) {
            Ok(s) => s,
            Err(advscen::Error::NotEnoughActors { .. }) => continue,
            Err(e) => return Err(format!("scene {seed}: {e}")),
        };
        scenes += 1;
        let set = &sets[0];
        for t in &set.trajectories {
            ensure!(is_plausible(t, &sc, set.actor_id).is_ok(), "scene {seed}: implausible member");
            ensure!(check_bounds(t, sc.dt, &b).is_none(), "scene {seed}: member out of bounds");
            members += 1;
        }
        let mut rng = RandomSource::new(seed).stream("projection");
        let dim = advscen::kinematics::dim_for_steps(sc.n_future);
        for _ in 0..20 {
            let delta = Perturbation::new((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect());
            let raw = ok(perturbed_trajectory(&sc, set.actor_id, &delta, &b))?;
            let i = project_index(&raw, set);
            ensure!(i == scan_nearest(&raw, set), "scene {seed}: projection differs from exhaustive scan");
            ensure!(project_index(&set.trajectories[i], set) == i, "scene {seed}: projection not idempotent");
            projections += 1;
        }
    }
    ensure!(scenes >= 15, "only {scenes}/20 scenes admit a feasible set");
    Ok(format!("{scenes}/20 scenes, {members} members, {projections} projections"))
}

// ---------------------------------------------------------------- 3

fn images_match(a: &RangeImage, b: &RangeImage) -> Result<f64, String> {
    ensure!(a.n_rays() == b.n_rays(), "ray count {} vs {}", a.n_rays(), b.n_rays());
    let mut worst: f64 = 0.0;
    for i in 0..a.n_rays() {
        let (x, y) = (a.ranges[i], b.ranges[i]);
        if x.is_infinite() || y.is_infinite() {
            ensure!(x.is_infinite() && y.is_infinite(), "ray {i}: {x} vs {y}");
        } else {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn random_image(rng: &mut impl Rng, n: usize) -> RangeImage {
    let mut img = RangeImage::empty(Default::default(), n);
    for i in 0..n {
        if rng.random_bool(0.7) {
            img.ranges[i] = rng.random_range(0.5..100.0);
            img.tags[i] = if rng.random_bool(0.5) { Tag::Background } else { Tag::Actor(rng.random_range(1..4)) };
        }
    }
    img
}

fn c3_sensor() -> Outcome {
    let b = PhysicalBounds::default();
    let lidar = LidarConfig::default();
    let mut worst: f64 = 0.0;
    let mut frames = 0;
    for seed in 0..50u64 {
        let sc = toy::random_scene(&RandomSource::new(2000 + seed), 5);
        let mut rng = RandomSource::new(seed).stream("sensor-oracle");
        let dim = advscen::kinematics::dim_for_steps(sc.n_future);
        let mut perturbed = BTreeMap::new();
        for a in &sc.actors {
            if rng.random_bool(0.6) {
                let delta = Perturbation::new((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect());
                perturbed.insert(a.id, ok(perturbed_trajectory(&sc, a.id, &delta, &b))?);
            }
        }
        let sweeps = ok(SensorSimulator::new(&sc, lidar).simulate(&perturbed))?;
        let world = ok(sc.with_trajectories(perturbed.iter().map(|(k, v)| (*k, v))))?;
        for (t, s) in sweeps.iter().enumerate() {
            worst = worst.max(images_match(&s.to_range_image(), &render_frame(&world, t, &lidar)).map_err(|e| format!("scene {seed} frame {t}: {e}"))?);
            frames += 1;
        }
    }
    ensure!(worst <= 1e-9, "edit vs render differ by {worst:e} m");

    let mut rng = RandomSource::new(3).stream("merge");
    let n = 360;
    for _ in 0..1000 {
        let (a, b, c) = (random_image(&mut rng, n), random_image(&mut rng, n), random_image(&mut rng, n));
        let m = |x: &RangeImage, y: &RangeImage| merge_min(x, y).map_err(|e| e.to_string());
        ensure!(m(&a, &b)?.ranges == m(&b, &a)?.ranges, "merge_min not commutative");
        ensure!(m(&m(&a, &b)?, &c)?.ranges == m(&a, &m(&b, &c)?)?.ranges, "merge_min not associative");
        ensure!(m(&a, &a)? == a, "merge_min not idempotent");
        ensure!(m(&a, &RangeImage::empty(a.pose, n))? == a, "empty image is not the identity");
        let ab = m(&a, &b)?;
        for i in 0..n {
            ensure!(ab.ranges[i] == a.ranges[i].min(b.ranges[i]), "merge_min ray {i} is not the minimum");
        }
    }
    Ok(format!("{frames} frames max |edit - render| {worst:.1e} m; 1000 merge_min triples"))
}

// ---------------------------------------------------------------- 4

fn c4_occlusion() -> Outcome {
    let sc = toy::occluding_bus();
    let sweeps = ok(SensorSimulator::new(&sc, LidarConfig::default()).simulate(&BTreeMap::new()))?;
    let rays: usize = sweeps.iter().map(|s| s.count_tag(Tag::Actor(toy::HIDDEN_ACTOR))).sum();
    ensure!(rays == 0, "hidden actor has {rays} returns");
    let mut near = 0;
    for (t, s) in sweeps.iter().enumerate() {
        let hidden = sc.actor(toy::HIDDEN_ACTOR).map_err(|e| e.to_string())?.box_at(t);
        near += detect(s)
            .iter()
            .filter(|d| {
                let world = s.pose.transform_point(d.center);
                hidden.contains_with_tolerance(world, 1.0)
            })
            .count();
    }
    ensure!(near == 0, "{near} detections on the hidden actor");
    let input = PlannerInput::from_scenario(&sc, sweeps, CostWeights::default());
    let sensor = ok(run_stack(StackKind::Sensor, &input, &sc))?;
    let gt = ok(run_stack(StackKind::GroundTruth, &input, &sc))?;
    let cs = |p: &Trajectory| advscen::adversary::loss::collision_steps(p, sc.sdv_footprint, &sc).map_err(|e| e.to_string());
    let (s, g) = (cs(&sensor.trajectory)?, cs(&gt.trajectory)?);
    ensure!(s > 0, "sensor plan does not collide");
    ensure!(g == 0, "ground-truth plan collides at {g} steps");
    Ok(format!("0 returns/0 detections on hidden actor; sensor collides {s} steps, ground truth 0"))
}

// ---------------------------------------------------------------- 5

fn concave(x: &[f64]) -> f64 {
    const C: [f64; 4] = [0.3, -0.2, 0.5, -0.4];
    1.0 - x.iter().zip(C).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / 4.0
}

fn c5_optimizers() -> Outcome {
    let expected = OptimizerParams {
        bo: BoParams { beta: 3.0, ..BoParams::default() },
        ga: GaParams {
            population: 32,
            generations: 50,
            max_plateaus: 25,
            initial_mutation_range: 1.0,
            min_mutation_range: 0.3,
            initial_mutation_prob: 0.5,
            min_mutation_prob: 0.1,
            gamma: 0.9,
        },
        rs: RsParams { epsilon: 0.25, iterations: 100 },
        nes: NesParams {
            samples_per_step: 10,
            learning_rate: 0.25,
            fd_probe: 0.5,
            iterations: 20,
        },
        bandit: BanditParams {
            prior_lr: 1.0,
            perturbation_lr: 0.25,
            fd_probe: 0.5,
            exploration: 1.0,
        },
    };
    ensure!(OptimizerParams::default() == expected, "default hyperparameters differ from the published tables");
    let budgets: Vec<usize> = Algorithm::ALL.iter().map(|a| a.default_budget()).collect();
    ensure!(budgets == [75, 1600, 100, 400, 100], "default budgets {budgets:?}");

    let params = OptimizerParams::default();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for a in Algorithm::ALL {
        let mut lo = f64::INFINITY;
        for seed in 0..10 {
            let rng = RandomSource::new(seed);
            let rec = ok(optimize_fn(concave, 4, a, a.default_budget(), &params, &rng))?;
            let again = ok(optimize_fn(concave, 4, a, a.default_budget(), &params, &rng))?;
            ensure!(rec.trace() == again.trace(), "{a} seed {seed}: not bit-identical");
            ensure!(rec.queries.len() <= a.default_budget(), "{a}: budget exceeded");
            let curve = rec.best_so_far();
            ensure!(curve.windows(2).all(|w| w[1] >= w[0]), "{a}: best-so-far not monotone");
            let best = rec.best_value().unwrap_or(f64::NEG_INFINITY);
            lo = lo.min(best);
            if best < 0.95 {
                failures.push(format!("{a}/seed{seed}={best:.3}"));
            }
        }
        summary.push(format!("{a} min {lo:.3}"));
    }
    ensure!(failures.is_empty(), "below 95% of optimum: {} ({})", failures.join(" "), summary.join(", "));
    Ok(summary.join(", "))
}

// ---------------------------------------------------------------- 6

#[derive(Deserialize)]
struct GridFile {
    levels: usize,
    stack: StackKind,
    seed: u64,
    n_sample: usize,
    scenes: Vec<GridScene>,
}

#[derive(Deserialize)]
struct GridScene {
    name: String,
    content_hash: String,
    oracle: advscen::adversary::GridOracle,
}

fn c6_falsification() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/grid_oracle.json");
    let text = ok(std::fs::read_to_string(path))?;
    let grid: GridFile = ok(serde_json::from_str(&text))?;
    let suite = toy::suite();
    ensure!(suite.len() == 6 && grid.scenes.len() == 6, "suite has {} scenes, oracle {}", suite.len(), grid.scenes.len());
    let oracle_cfg = AttackConfig {
        stack: grid.stack,
        seed: grid.seed,
        n_sample: grid.n_sample,
        ..AttackConfig::default()
    };
    let mut provable = Vec::new();
    for ((name, sc), g) in suite.iter().zip(&grid.scenes) {
        ensure!(*name == g.name && sc.content_hash() == g.content_hash, "oracle is stale for {name}; rerun the grid_oracle example");
        if let Some(w) = &g.oracle.witness {
            let (steps, _) = ok(evaluate_reduced(sc, &grid.stack, &oracle_cfg, w))?;
            ensure!(steps > 0, "{name}: committed witness does not collide");
            provable.push((*name, sc));
        }
    }
    let config = AttackConfig {
        algorithm: Algorithm::Bo,
        budget: Some(75),
        stack: StackKind::Sensor,
        ..AttackConfig::default()
    };
    let mut found = Vec::new();
    for (name, sc) in &provable {
        let out = ok(attack(sc, &config))?;
        let perturbed = out.perturbed();
        for (id, traj) in &perturbed {
            ensure!(is_plausible(traj, sc, *id).is_ok(), "{name}: winner for actor {id} implausible");
            ensure!(check_bounds(traj, sc.dt, &config.bounds).is_none(), "{name}: winner out of bounds");
        }
        if out.record.found_collision() {
            found.push(*name);
        }
    }
    let detail = format!("BO found {}/{} provable scenes ({}) on a {}^6 grid", found.len(), provable.len(), found.join(", "), grid.levels);
    ensure!(found.len() >= 4, "{detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- 7

fn c7_directional() -> Outcome {
    let committed: regression::Baseline = ok(serde_json::from_str(&ok(std::fs::read_to_string(regression::PATH))?))?;
    let now = ok(regression::compute())?;
    ensure!(now == committed, "results drifted from the committed baseline: {now:?}");
    let bo_vs_rs = now.bo_collision_5s >= now.rs_collision_5s;
    let diag = regression::diagonal_dominates(&now.transfer_collision_5s);
    let detail = format!(
        "BO {:.3} vs RS {:.3} collision@5s ({}); transfer collision@5s {:?} diagonal {}",
        now.bo_collision_5s,
        now.rs_collision_5s,
        if bo_vs_rs { "ok" } else { "FAIL" },
        now.transfer_collision_5s,
        if diag { "dominates" } else { "does NOT dominate" }
    );
    ensure!(bo_vs_rs && diag, "{detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- 8

fn sat_overlap(a: &OrientedBox, b: &OrientedBox) -> bool {
    let (ca, cb) = (a.corners(), b.corners());
    let mut axes = Vec::new();
    for c in [&ca, &cb] {
        for i in 0..2 {
            let e = c[i + 1] - c[i];
            axes.push(Vec2::new(-e.y, e.x));
        }
    }
    axes.iter().all(|ax| {
        let span = |c: &[Vec2; 4]| c.iter().map(|p| p.dot(*ax)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let ((l1, h1), (l2, h2)) = (span(&ca), span(&cb));
        h1 >= l2 && h2 >= l1
    })
}

fn on_road(map: &HdMap, p: Vec2) -> bool {
    map.lanes.iter().any(|l| {
        l.centerline.windows(2).any(|w| {
            let (a, b) = (w[0], w[1]);
            let ab = b - a;
            let s = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            (a + ab * s).distance(p) <= 0.5 * l.width
        })
    })
}

/// (imitation, collision, safety) computed from the definitions.
fn terms(plan: &Trajectory, world: &Scenario, b: &PhysicalBounds) -> (f64, f64, f64) {
    let expert = expert_future(world);
    let cur = world.current_index();
    let (mut il, mut col, mut safety) = (0.0, 0.0, 0.0);
    for j in 1..plan.len() {
        let s = &plan.states[j];
        let d = ((s.x - expert.states[j].x).powi(2) + (s.y - expert.states[j].y).powi(2)).sqrt();
        il += if d < 1.0 { 0.5 * d * d } else { d - 0.5 };
        let me = world.sdv_footprint.at(plan.pose(j));
        if world.actors.iter().any(|a| sat_overlap(&me, &a.box_at(cur + j))) {
            col += COLLISION_STEP_COST;
        }
        safety += if on_road(&world.map, s.position()) { 0.0 } else { 1.0 };
        safety += (s.v * s.v * s.kappa.abs() - b.max_lateral_accel).max(0.0);
        if j + 1 < plan.len() {
            let jerk = (plan.states[j + 1].v - 2.0 * s.v + plan.states[j - 1].v) / (world.dt * world.dt);
            safety += (jerk.abs() - JERK_THRESHOLD).max(0.0);
        }
    }
    (il, col, safety)
}

fn c8_ablations() -> Outcome {
    // Loose bounds so random plans also exercise the lateral and jerk terms.
    let loose = PhysicalBounds {
        max_accel: 6.0,
        max_curvature_rate: 0.3,
        max_lateral_accel: 12.0,
        ..PhysicalBounds::default()
    };
    let b = PhysicalBounds::default();
    let suite = toy::suite();
    let mut rng = RandomSource::new(8).stream("plans");
    let masks = [
        ("M0", (true, true, true)),
        ("M1", (true, false, false)),
        ("M2", (false, true, false)),
        ("M3", (true, true, false)),
        ("M4", (false, false, true)),
        ("M5", (false, true, true)),
    ];
    let (mut worst, mut nonzero) = (0.0f64, [0usize; 3]);
    for k in 0..100 {
        let world = &suite[k % suite.len()].1;
        let s0 = world.sdv_expert.states[world.current_index()];
        let s0 = BicycleState { theta: s0.theta + rng.random_range(-0.4..0.4), ..s0 };
        let controls = (0..world.n_future).map(|_| Control::new(rng.random_range(-6.0..6.0), rng.random_range(-0.3..0.3))).collect();
        let plan = ok(rollout(&s0, &ControlSequence(controls), world.dt, &loose))?.trajectory;
        let (il, col, safety) = terms(&plan, world, &b);
        for (i, v) in [il, col, safety].into_iter().enumerate() {
            nonzero[i] += (v > 0.0) as usize;
        }
        for (name, (i, c, s)) in masks {
            let mask: ObjectiveMask = ok(name.parse())?;
            ensure!(mask == ObjectiveMask::new(i, c, s), "{name} term selection");
            let got = ok(adversarial_loss(&plan, world, mask, &b))?.total;
            let want = [(i, il), (c, col), (s, safety)].iter().filter(|t| t.0).map(|t| t.1).sum::<f64>();
            worst = worst.max((got - want).abs());
        }
    }
    ensure!(worst <= 1e-9, "mask loss differs from term sum by {worst:e}");
    ensure!(nonzero.iter().all(|&n| n > 0), "some term never fired: {nonzero:?}");
    Ok(format!("600 losses, max |diff| {worst:.1e}; plans with nonzero (il, col, safety): {nonzero:?}"))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("kinematics closed forms", Duration::from_secs(1), c1_kinematics),
        ("feasibility invariants", Duration::from_secs(60), c2_feasibility),
        ("sensor master oracle", Duration::from_secs(30), c3_sensor),
        ("occlusion failure", Duration::from_secs(60), c4_occlusion),
        ("optimizer correctness", Duration::from_secs(120), c5_optimizers),
        ("end-to-end falsification", Duration::from_secs(600), c6_falsification),
        ("directional regressions", Duration::from_secs(600), c7_directional),
        ("objective ablations", Duration::from_secs(60), c8_ablations),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|x| x == &n.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t0.elapsed();
        let result = match result {
            Ok(d) if took > *limit => Err(format!("{d}; took {:.1} s, limit {} s", took.as_secs_f64(), limit.as_secs())),
            r => r,
        };
        match &result {
            Ok(d) => println!("criterion {n} PASS  {name} ({:.2} s): {d}", took.as_secs_f64()),
            Err(d) => {
                failed += 1;
                println!("criterion {n} FAIL  {name} ({:.2} s): {d}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
