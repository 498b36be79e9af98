//! The end-to-end attack: pick actors, build their plausible sets, then let a
//! black-box optimizer search perturbations against a planner. Every query
//! decodes and rolls out each actor's slice of the perturbation, projects it
//! onto the actor's plausible set, re-simulates the sweeps, runs the planner
//! and scores its plan.

use super::loss::{adversarial_loss, collision_steps, LossBreakdown, ObjectiveMask};
use super::optim::{optimize, Algorithm, OptimizerParams, SearchRecord};
use crate::autonomy::{CostWeights, Plan, Planner, PlannerInput, StackKind};
use crate::error::{Error, Result};
use crate::feasibility::{is_plausible, perturbed_trajectory, project_index, select_and_sample, FeasibleSet, DEFAULT_N_SAMPLE};
use crate::kinematics::{dim_for_steps, Perturbation, PhysicalBounds};
use crate::scenario::{RandomSource, Scenario, Trajectory};
use crate::sensorsim::{LidarConfig, SensorSimulator, Sweep};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub algorithm: Algorithm,
    /// Total queries including the unperturbed baseline; defaults to the
    /// algorithm's usual budget.
    pub budget: Option<usize>,
    /// Number of perturbed actors.
    pub m: usize,
    pub seed: u64,
    /// Rejection-sampling draws per actor when building plausible sets.
    pub n_sample: usize,
    #[serde(with = "mask_name")]
    pub objective: ObjectiveMask,
    pub stack: StackKind,
    pub weights: CostWeights,
    pub lidar: LidarConfig,
    pub bounds: PhysicalBounds,
    pub params: OptimizerParams,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Bo,
            budget: None,
            m: 1,
            seed: 0,
            n_sample: DEFAULT_N_SAMPLE,
            objective: ObjectiveMask::default(),
            stack: StackKind::Sensor,
            weights: CostWeights::default(),
            lidar: LidarConfig::default(),
            bounds: PhysicalBounds::default(),
            params: OptimizerParams::default(),
        }
    }
}

mod mask_name {
    use super::ObjectiveMask;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ObjectiveMask, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(m)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ObjectiveMask, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl AttackConfig {
    pub fn budget(&self) -> usize {
        self.budget.unwrap_or_else(|| self.algorithm.default_budget())
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget() == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.n_sample == 0 {
            return Err(Error::Config("n_sample must be at least 1".into()));
        }
        if self.lidar.n_rays == 0 || !(self.lidar.max_range > 0.0) {
            return Err(Error::Config("lidar needs rays and a positive range".into()));
        }
        self.bounds.validate()?;
        self.params.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("attack config serializes")
    }
}

/// One pipeline evaluation. The baseline query has an empty `delta` and no
/// members: it runs the recorded scenario untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackQuery {
    pub delta: Vec<f64>,
    /// Index into each selected actor's plausible set, in selection order.
    pub members: Vec<usize>,
    pub loss: LossBreakdown,
    pub value: f64,
    pub collision_steps: usize,
    pub seconds: f64,
}

impl AttackQuery {
    pub fn is_baseline(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub algorithm: Algorithm,
    pub planner: String,
    pub budget: usize,
    pub seed: u64,
    pub objective: String,
    /// Perturbed actors in selection order; the perturbation vector is their
    /// per-actor slices concatenated in this order.
    pub actor_ids: Vec<u32>,
    pub dim: usize,
    pub queries: Vec<AttackQuery>,
    /// First query attaining the maximum value.
    pub best: usize,
    /// Objective error that cut the search short, if any.
    pub error: Option<String>,
}

impl AttackRecord {
    pub fn best_query(&self) -> &AttackQuery {
        &self.queries[self.best]
    }

    pub fn baseline(&self) -> &AttackQuery {
        &self.queries[0]
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.queries
            .iter()
            .map(|q| {
                best = best.max(q.value);
                best
            })
            .collect()
    }

    pub fn total_seconds(&self) -> f64 {
        self.queries.iter().map(|q| q.seconds).sum()
    }

    pub fn found_collision(&self) -> bool {
        self.queries.iter().any(|q| q.collision_steps > 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("attack record serializes")
    }
}

/// Result of [`attack`]: the record plus the materialized worst case.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub record: AttackRecord,
    /// Scenario with the winning perturbed trajectories substituted.
    pub scenario: Scenario,
    /// Sweeps the planner saw for the winner (empty if it reads none).
    pub sweeps: Vec<Sweep>,
    pub plan: Plan,
    /// The planner's output on the untouched scenario (query 1).
    pub baseline_plan: Plan,
    pub sets: Vec<FeasibleSet>,
}

impl AttackOutcome {
    /// The winning trajectory of each perturbed actor.
    pub fn perturbed(&self) -> BTreeMap<u32, Trajectory> {
        let q = self.record.best_query();
        self.sets
            .iter()
            .zip(&q.members)
            .map(|(s, &i)| (s.actor_id, s.trajectories[i].clone()))
            .collect()
    }
}

struct Pipeline<'a, P: Planner> {
    scenario: &'a Scenario,
    planner: &'a P,
    sim: SensorSimulator<'a>,
    sets: Vec<FeasibleSet>,
    config: &'a AttackConfig,
}

struct Evaluated {
    world: Scenario,
    sweeps: Vec<Sweep>,
    plan: Plan,
    loss: LossBreakdown,
    collision_steps: usize,
}

impl<P: Planner> Pipeline<'_, P> {
    fn members_for(&self, delta: &[f64]) -> Result<Vec<usize>> {
        let per = dim_for_steps(self.scenario.n_future);
        self.sets
            .iter()
            .enumerate()
            .map(|(k, set)| {
                let slice = Perturbation::new(delta[k * per..(k + 1) * per].to_vec());
                let traj = perturbed_trajectory(self.scenario, set.actor_id, &slice, &self.config.bounds)?;
                Ok(project_index(&traj, set))
            })
            .collect()
    }

    fn evaluate(&self, members: &[usize]) -> Result<Evaluated> {
        let perturbed: BTreeMap<u32, Trajectory> = self
            .sets
            .iter()
            .zip(members)
            .map(|(s, &i)| (s.actor_id, s.trajectories[i].clone()))
            .collect();
        let world = self.scenario.with_trajectories(perturbed.iter().map(|(&id, t)| (id, t)))?;
        let sweeps = if self.planner.uses_sweeps() {
            self.sim.simulate(&perturbed)?
        } else {
            Vec::new()
        };
        let mut input = PlannerInput::from_scenario(&world, sweeps, self.config.weights);
        input.bounds = self.config.bounds;
        let plan = self.planner.plan(&input, &world)?;
        let sweeps = input.sweeps;
        let loss = adversarial_loss(&plan.trajectory, &world, self.config.objective, &self.config.bounds)?;
        let collision_steps = collision_steps(&plan.trajectory, world.sdv_footprint, &world)?;
        Ok(Evaluated {
            world,
            sweeps,
            plan,
            loss,
            collision_steps,
        })
    }
}

/// Attacks one of the built-in stacks.
pub fn attack(scenario: &Scenario, config: &AttackConfig) -> Result<AttackOutcome> {
    attack_planner(scenario, &config.stack, config)
}

/// Attacks an arbitrary planner. Query 1 is the unperturbed scenario; the
/// optimizer spends the remaining budget over `m * 24` dimensions.
pub fn attack_planner<P: Planner>(scenario: &Scenario, planner: &P, config: &AttackConfig) -> Result<AttackOutcome> {
    config.validate()?;
    scenario.validate()?;
    let rng = RandomSource::new(config.seed);
    let sets = select_and_sample(scenario, config.m, config.n_sample, &rng, &config.bounds)?;
    let actor_ids: Vec<u32> = sets.iter().map(|s| s.actor_id).collect();
    let dim = config.m * dim_for_steps(scenario.n_future);
    let pipe = Pipeline {
        scenario,
        planner,
        sim: SensorSimulator::new(scenario, config.lidar),
        sets,
        config,
    };
    let budget = config.budget();

    let t0 = Instant::now();
    let base = pipe.evaluate(&[])?;
    let mut queries = vec![AttackQuery {
        delta: Vec::new(),
        members: Vec::new(),
        loss: base.loss,
        value: base.loss.total,
        collision_steps: base.collision_steps,
        seconds: t0.elapsed().as_secs_f64(),
    }];

    let mut error = None;
    if budget > 1 {
        let objective = |delta: &[f64]| -> Result<(f64, (Vec<usize>, LossBreakdown, usize))> {
            let members = pipe.members_for(delta)?;
            let ev = pipe.evaluate(&members)?;
            Ok((ev.loss.total, (members, ev.loss, ev.collision_steps)))
        };
        let search: SearchRecord<_> = optimize(
            &objective,
            dim,
            config.algorithm,
            budget - 1,
            &config.params,
            &rng.split("attack"),
        )?;
        error = search.error;
        queries.extend(search.queries.into_iter().map(|q| {
            let (members, loss, steps) = q.info;
            AttackQuery {
                delta: q.delta,
                members,
                loss,
                value: q.value,
                collision_steps: steps,
                seconds: q.seconds,
            }
        }));
    }

    let mut best = 0;
    for (i, q) in queries.iter().enumerate() {
        if q.value > queries[best].value {
            best = i;
        }
    }
    let record = AttackRecord {
        algorithm: config.algorithm,
        planner: planner.name(),
        budget,
        seed: config.seed,
        objective: config.objective.to_string(),
        actor_ids,
        dim,
        queries,
        best,
        error,
    };

    let baseline_plan = base.plan.clone();
    let winner = if record.best_query().is_baseline() {
        base
    } else {
        pipe.evaluate(&record.best_query().members)?
    };
    for set in &pipe.sets {
        let traj = &winner.world.actor(set.actor_id)?.trajectory;
        if let Err(why) = is_plausible(traj, scenario, set.actor_id) {
            return Err(Error::Validation(format!("winning trajectory of actor {} is implausible: {why}", set.actor_id)));
        }
    }
    debug_assert_eq!(winner.loss.total, record.best_query().value);
    Ok(AttackOutcome {
        record,
        scenario: winner.world,
        sweeps: winner.sweeps,
        plan: winner.plan,
        baseline_plan,
        sets: pipe.sets,
    })
}

/// Runs `planner` once on `scenario` with some actors replaced, simulating
/// sweeps from the original recording. Returns the world, the sweeps and
/// the plan.
pub fn run_planner<P: Planner>(
    scenario: &Scenario,
    perturbed: &BTreeMap<u32, Trajectory>,
    planner: &P,
    config: &AttackConfig,
) -> Result<(Scenario, Vec<Sweep>, Plan)> {
    let world = scenario.with_trajectories(perturbed.iter().map(|(&id, t)| (id, t)))?;
    let sweeps = if planner.uses_sweeps() {
        crate::sensorsim::simulate(scenario, perturbed, &config.lidar)?
    } else {
        Vec::new()
    };
    let mut input = PlannerInput::from_scenario(&world, sweeps, config.weights);
    input.bounds = config.bounds;
    let plan = planner.plan(&input, &world)?;
    let sweeps = input.sweeps;
    Ok((world, sweeps, plan))
}

/// Number of coordinates of the reduced perturbation used by [`grid_oracle`]:
/// the four initial-state offsets, one acceleration and one curvature rate
/// held for the whole horizon.
pub const REDUCED_DIM: usize = 6;

/// Expands a reduced perturbation to the full per-actor vector.
pub fn expand_reduced(r: &[f64], n_future: usize) -> Vec<f64> {
    let mut out = r[..4].to_vec();
    for _ in 0..n_future {
        out.push(r[4]);
        out.push(r[5]);
    }
    out
}

/// Outcome of exhaustive search over the reduced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOracle {
    pub levels: usize,
    pub n_evaluated: usize,
    /// Grid points whose plan collides.
    pub n_colliding: usize,
    /// First colliding grid point in lexicographic order, if any.
    pub witness: Option<Vec<f64>>,
    pub max_value: f64,
}

/// Brute force over `levels` evenly spaced values per reduced coordinate
/// (a single actor, the first selected one). Establishes whether a colliding
/// perturbation exists at all, independently of any optimizer.
pub fn grid_oracle<P: Planner>(scenario: &Scenario, planner: &P, config: &AttackConfig, levels: usize) -> Result<GridOracle> {
    use rayon::prelude::*;
    config.validate()?;
    if levels < 2 {
        return Err(Error::Config("grid needs at least 2 levels".into()));
    }
    let rng = RandomSource::new(config.seed);
    let sets = select_and_sample(scenario, 1, config.n_sample, &rng, &config.bounds)?;
    let pipe = Pipeline {
        scenario,
        planner,
        sim: SensorSimulator::new(scenario, config.lidar),
        sets,
        config,
    };
    let level = |i: usize| -1.0 + 2.0 * i as f64 / (levels - 1) as f64;
    let total = levels.pow(REDUCED_DIM as u32);
    let results: Vec<(usize, f64)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let r = grid_point(idx, levels, level);
            let members = pipe.members_for(&expand_reduced(&r, scenario.n_future))?;
            let ev = pipe.evaluate(&members)?;
            Ok((ev.collision_steps, ev.loss.total))
        })
        .collect::<Result<_>>()?;
    let witness = results
        .iter()
        .position(|r| r.0 > 0)
        .map(|i| grid_point(i, levels, level));
    Ok(GridOracle {
        levels,
        n_evaluated: total,
        n_colliding: results.iter().filter(|r| r.0 > 0).count(),
        witness,
        max_value: results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Collision steps and objective value of one reduced point, evaluated
/// exactly as [`grid_oracle`] does. Used to re-check committed witnesses.
pub fn evaluate_reduced<P: Planner>(scenario: &Scenario, planner: &P, config: &AttackConfig, r: &[f64]) -> Result<(usize, f64)> {
    config.validate()?;
    if r.len() != REDUCED_DIM {
        return Err(Error::Config(format!("reduced point needs {REDUCED_DIM} coordinates, got {}", r.len())));
    }
    let rng = RandomSource::new(config.seed);
    let sets = select_and_sample(scenario, 1, config.n_sample, &rng, &config.bounds)?;
    let pipe = Pipeline {
        scenario,
        planner,
        sim: SensorSimulator::new(scenario, config.lidar),
        sets,
        config,
    };
    let members = pipe.members_for(&expand_reduced(r, scenario.n_future))?;
    let ev = pipe.evaluate(&members)?;
    Ok((ev.collision_steps, ev.loss.total))
}

fn grid_point(mut idx: usize, levels: usize, level: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut r = vec![0.0; REDUCED_DIM];
    for c in r.iter_mut().rev() {
        *c = level(idx % levels);
        idx /= levels;
    }
    r
}
