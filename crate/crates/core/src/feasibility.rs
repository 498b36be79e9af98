//! Physically plausible trajectory sets for perturbed actors.
//!
//! For each perturbed actor we rejection-sample random perturbations, roll
//! them out, and keep the trajectories that stay on the road and never touch
//! another actor's recorded footprint or the SDV's expert footprint. Search
//! proposals are then projected onto this finite set.

use crate::error::{Error, Result};
use crate::kinematics::{self, check_bounds, decode, rollout, BicycleState, Perturbation, PhysicalBounds};
use crate::scenario::{RandomSource, Scenario, Trajectory};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Minimum number of plausible trajectories for an actor to be perturbable.
pub const N_MIN: usize = 100;
/// Default number of rejection-sampling draws per actor.
pub const DEFAULT_N_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub actor_id: u32,
    pub trajectories: Vec<Trajectory>,
    /// Seed of the sampling stream.
    pub seed: u64,
    pub n_sample: usize,
    /// Draw index of each surviving trajectory, ascending.
    pub sample_indices: Vec<usize>,
}

impl FeasibleSet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.len() as f64 / self.n_sample.max(1) as f64
    }
}

/// Why a trajectory was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Implausibility {
    LengthMismatch { expected: usize, got: usize },
    CollidesActor { actor_id: u32, t: usize },
    CollidesExpertSdv { t: usize },
    OffRoad { t: usize },
}

impl fmt::Display for Implausibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Implausibility::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Implausibility::CollidesActor { actor_id, t } => write!(f, "collides actor {actor_id} @ {t}"),
            Implausibility::CollidesExpertSdv { t } => write!(f, "collides expert SDV @ {t}"),
            Implausibility::OffRoad { t } => write!(f, "off-road @ {t}"),
        }
    }
}

/// Checks `traj` as a replacement trajectory for `actor_id`. Per timestep the
/// checks run in order: other actors, expert SDV, on-road.
pub fn is_plausible(traj: &Trajectory, scenario: &Scenario, actor_id: u32) -> Result<(), Implausibility> {
    let horizon = scenario.horizon();
    if traj.len() != horizon {
        return Err(Implausibility::LengthMismatch {
            expected: horizon,
            got: traj.len(),
        });
    }
    let footprint = match scenario.actor(actor_id) {
        Ok(a) => a.footprint,
        Err(_) => {
            return Err(Implausibility::LengthMismatch {
                expected: horizon,
                got: 0,
            })
        }
    };
    for t in 0..horizon {
        let pose = traj.pose(t);
        let b = footprint.at(pose);
        if let Some(other) = scenario
            .actors
            .iter()
            .find(|o| o.id != actor_id && o.box_at(t).overlaps(&b))
        {
            return Err(Implausibility::CollidesActor { actor_id: other.id, t });
        }
        if scenario.sdv_box_at(t).overlaps(&b) {
            return Err(Implausibility::CollidesExpertSdv { t });
        }
        if !scenario.map.is_on_road(pose.position()) {
            return Err(Implausibility::OffRoad { t });
        }
    }
    Ok(())
}

/// Full-horizon trajectory from a perturbed current state and its rollout.
/// The observation steps before the current one are back-extrapolated at the
/// perturbed initial speed along the perturbed initial heading.
pub fn with_history(rollout: &Trajectory, n_history: usize, dt: f64) -> Trajectory {
    let s0 = rollout.states[0];
    let (sin, cos) = s0.theta.sin_cos();
    let mut states: Vec<BicycleState> = (1..n_history)
        .rev()
        .map(|k| {
            let back = k as f64 * dt * s0.v;
            BicycleState {
                x: s0.x - back * cos,
                y: s0.y - back * sin,
                a: 0.0,
                ..s0
            }
        })
        .collect();
    states.extend_from_slice(&rollout.states);
    Trajectory::new(states)
}

/// Decodes `delta` against the actor's current recorded state and rolls it
/// out over the full scenario horizon.
pub fn perturbed_trajectory(
    scenario: &Scenario,
    actor_id: u32,
    delta: &Perturbation,
    bounds: &PhysicalBounds,
) -> Result<Trajectory> {
    let actor = scenario.actor(actor_id)?;
    let base = actor.trajectory.states[scenario.current_index()];
    let (s0, controls) = decode(delta, &base, scenario.n_future, bounds)?;
    let r = rollout(&s0, &controls, scenario.dt, bounds)?;
    Ok(with_history(&r.trajectory, scenario.n_history, scenario.dt))
}

fn sampling_stream(rng: &RandomSource, actor_id: u32) -> RandomSource {
    rng.split_indexed("feasible-set", actor_id as u64)
}

/// Rejection-samples `n_sample` uniform perturbations for `actor_id` and
/// keeps the plausible, bounded ones in draw order.
pub fn sample_feasible_set(
    scenario: &Scenario,
    actor_id: u32,
    n_sample: usize,
    rng: &RandomSource,
    bounds: &PhysicalBounds,
) -> Result<FeasibleSet> {
    let actor = scenario.actor(actor_id)?;
    if !actor.is_perturbable {
        return Err(Error::Validation(format!("actor {actor_id} is not perturbable")));
    }
    let stream = sampling_stream(rng, actor_id);
    let dim = kinematics::dim_for_steps(scenario.n_future);
    let mut draw = stream.rng();
    let deltas: Vec<Perturbation> = (0..n_sample)
        .map(|_| Perturbation::new((0..dim).map(|_| draw.random_range(-1.0..=1.0)).collect()))
        .collect();

    let survivors: Vec<(usize, Trajectory)> = deltas
        .par_iter()
        .enumerate()
        .filter_map(|(i, delta)| {
            let traj = perturbed_trajectory(scenario, actor_id, delta, bounds).ok()?;
            if check_bounds(&traj, scenario.dt, bounds).is_some() {
                return None;
            }
            is_plausible(&traj, scenario, actor_id).ok()?;
            Some((i, traj))
        })
        .collect();

    if survivors.len() < N_MIN {
        return Err(Error::ActorInfeasible {
            actor_id,
            survivors: survivors.len(),
            required: N_MIN,
        });
    }
    let (sample_indices, trajectories) = survivors.into_iter().unzip();
    Ok(FeasibleSet {
        actor_id,
        trajectories,
        seed: stream.seed(),
        n_sample,
        sample_indices,
    })
}

/// Index of the set member nearest to `traj` in summed squared waypoint
/// distance; ties go to the lowest index.
pub fn project_index(traj: &Trajectory, set: &FeasibleSet) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, member) in set.trajectories.iter().enumerate() {
        let d = traj.squared_distance(member);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

pub fn project<'a>(traj: &Trajectory, set: &'a FeasibleSet) -> &'a Trajectory {
    &set.trajectories[project_index(traj, set)]
}

/// Perturbable actors ordered by their closest time-aligned approach to the
/// SDV expert trajectory (ties by id).
pub fn rank_actors(scenario: &Scenario) -> Vec<(u32, f64)> {
    let mut ranked: Vec<(u32, f64)> = scenario
        .actors
        .iter()
        .filter(|a| a.is_perturbable)
        .map(|a| {
            let d = a
                .trajectory
                .positions()
                .zip(scenario.sdv_expert.positions())
                .map(|(p, q)| p.distance(q))
                .fold(f64::INFINITY, f64::min);
            (a.id, d)
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Picks the `m` closest actors that admit a feasible set, skipping
/// infeasible ones. Each set is conditioned on every other actor's
/// recorded trajectory.
pub fn select_and_sample(
    scenario: &Scenario,
    m: usize,
    n_sample: usize,
    rng: &RandomSource,
    bounds: &PhysicalBounds,
) -> Result<Vec<FeasibleSet>> {
    if m == 0 {
        return Err(Error::Config("m must be at least 1".into()));
    }
    let mut chosen = Vec::with_capacity(m);
    for (id, dist) in rank_actors(scenario) {
        match sample_feasible_set(scenario, id, n_sample, rng, bounds) {
            Ok(set) => {
                chosen.push(set);
                if chosen.len() == m {
                    return Ok(chosen);
                }
            }
            Err(Error::ActorInfeasible { survivors, .. }) => {
                log::info!("skipping actor {id} at {dist:.2} m: only {survivors} plausible trajectories");
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotEnoughActors {
        found: chosen.len(),
        required: m,
    })
}

pub fn select_perturbed_actors(
    scenario: &Scenario,
    m: usize,
    n_sample: usize,
    rng: &RandomSource,
    bounds: &PhysicalBounds,
) -> Result<Vec<u32>> {
    Ok(select_and_sample(scenario, m, n_sample, rng, bounds)?
        .into_iter()
        .map(|s| s.actor_id)
        .collect())
}

#[derive(Serialize, Deserialize)]
struct CachedSet {
    bounds: PhysicalBounds,
    set: FeasibleSet,
}

/// On-disk cache keyed by (scenario hash, actor id, seed, n_sample).
#[derive(Debug, Clone)]
pub struct FeasibleSetCache {
    dir: PathBuf,
}

impl FeasibleSetCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, scenario: &Scenario, actor_id: u32, rng: &RandomSource, n_sample: usize) -> PathBuf {
        let hash = scenario.content_hash();
        self.dir
            .join(format!("{}_{actor_id}_{}_{n_sample}.json", &hash[..16], rng.seed()))
    }

    pub fn get_or_sample(
        &self,
        scenario: &Scenario,
        actor_id: u32,
        n_sample: usize,
        rng: &RandomSource,
        bounds: &PhysicalBounds,
    ) -> Result<FeasibleSet> {
        let path = self.path_for(scenario, actor_id, rng, n_sample);
        if let Some(set) = read_cached(&path, bounds) {
            return Ok(set);
        }
        let set = sample_feasible_set(scenario, actor_id, n_sample, rng, bounds)?;
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let json = serde_json::to_vec(&CachedSet { bounds: *bounds, set: set.clone() })
            .expect("feasible set serializes");
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(set)
    }
}

fn read_cached(path: &Path, bounds: &PhysicalBounds) -> Option<FeasibleSet> {
    let bytes = std::fs::read(path).ok()?;
    let cached: CachedSet = serde_json::from_slice(&bytes).ok()?;
    (cached.bounds == *bounds).then_some(cached.set)
}
