//! Systems under test: a sampling planner fed either ground-truth actor
//! futures or a LiDAR detector + constant-velocity forecaster.
//!
//! Callers only see [`Plan`]; the stacks are black boxes to the adversary.

mod detect;
mod forecast;
mod plan;

pub use detect::{detect, detect_with, Detection, DetectorConfig};
pub use forecast::{forecast, ASSOCIATION_GATE};
pub use plan::{candidates, plan, score_candidate, CostBreakdown, CostWeights, Plan, COLLISION_MARGIN, N_CANDIDATES};

use crate::error::{Error, Result};
use crate::kinematics::{BicycleState, PhysicalBounds};
use crate::scenario::geometry::{Footprint, OrientedBox, Pose};
use crate::scenario::{HdMap, Scenario};
use crate::sensorsim::Sweep;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Everything the planner may look at.
#[derive(Debug, Clone)]
pub struct PlannerInput<'a> {
    pub sweeps: Vec<Sweep>,
    pub map: &'a HdMap,
    pub sdv_history: Vec<BicycleState>,
    pub sdv_footprint: Footprint,
    pub n_future: usize,
    pub dt: f64,
    pub weights: CostWeights,
    pub bounds: PhysicalBounds,
}

impl<'a> PlannerInput<'a> {
    /// Input built from the observation steps of `scenario`.
    pub fn from_scenario(scenario: &'a Scenario, sweeps: Vec<Sweep>, weights: CostWeights) -> Self {
        Self {
            sweeps,
            map: &scenario.map,
            sdv_history: scenario.sdv_expert.states[..scenario.n_history].to_vec(),
            sdv_footprint: scenario.sdv_footprint,
            n_future: scenario.n_future,
            dt: scenario.dt,
            weights,
            bounds: PhysicalBounds::default(),
        }
    }

    pub fn current_state(&self) -> Result<&BicycleState> {
        self.sdv_history
            .last()
            .ok_or_else(|| Error::Validation("planner input has no SDV history".into()))
    }
}

/// Something the planner must not hit: a footprint and one pose per plan
/// step, index 0 being the current step.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub footprint: Footprint,
    pub poses: Vec<Pose>,
}

impl Obstacle {
    pub fn box_at(&self, j: usize) -> Option<OrientedBox> {
        self.poses.get(j).map(|p| self.footprint.at(*p))
    }
}

/// Future of every actor in `world` from its current step, as obstacles.
pub fn ground_truth_obstacles(world: &Scenario) -> Vec<Obstacle> {
    let cur = world.current_index();
    world
        .actors
        .iter()
        .map(|a| Obstacle {
            footprint: a.footprint,
            poses: (cur..=cur + world.n_future).map(|t| a.trajectory.pose(t)).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackKind {
    /// Planner fed the true future of every actor.
    GroundTruth,
    /// Detector and forecaster on simulated sweeps, then the planner.
    Sensor,
}

impl StackKind {
    pub const ALL: [StackKind; 2] = [StackKind::GroundTruth, StackKind::Sensor];
}

impl fmt::Display for StackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StackKind::GroundTruth => "ground_truth",
            StackKind::Sensor => "sensor",
        })
    }
}

impl FromStr for StackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ground_truth" | "gt" => Ok(StackKind::GroundTruth),
            "sensor" => Ok(StackKind::Sensor),
            _ => Err(Error::Config(format!("unknown stack {s:?} (expected ground_truth or sensor)"))),
        }
    }
}

/// Obstacles the given stack would hand to its planner.
pub fn perceive(kind: StackKind, input: &PlannerInput, world: &Scenario) -> Vec<Obstacle> {
    match kind {
        StackKind::GroundTruth => ground_truth_obstacles(world),
        StackKind::Sensor => {
            let frames: Vec<_> = input.sweeps.iter().map(detect).collect();
            let sensors: Vec<_> = input.sweeps.iter().map(|s| s.pose).collect();
            forecast(&frames, &sensors, input.n_future, input.dt)
        }
    }
}

/// Runs one stack end to end. `world` supplies actor ground truth for the
/// ground-truth stack; the sensor stack only reads `input.sweeps`.
pub fn run_stack(kind: StackKind, input: &PlannerInput, world: &Scenario) -> Result<Plan> {
    if kind == StackKind::Sensor && input.sweeps.len() != world.n_history {
        return Err(Error::Validation(format!(
            "sensor stack needs {} sweeps, got {}",
            world.n_history,
            input.sweeps.len()
        )));
    }
    plan(input, &perceive(kind, input, world))
}

/// Anything the adversary can attack: turns a planner input (plus the world,
/// for privileged stacks) into a plan.
pub trait Planner: Sync {
    fn name(&self) -> String;

    /// Whether the planner reads `input.sweeps`; if not, the attack loop
    /// skips sensor simulation.
    fn uses_sweeps(&self) -> bool {
        true
    }

    fn plan(&self, input: &PlannerInput, world: &Scenario) -> Result<Plan>;
}

impl Planner for StackKind {
    fn name(&self) -> String {
        self.to_string()
    }

    fn uses_sweeps(&self) -> bool {
        *self == StackKind::Sensor
    }

    fn plan(&self, input: &PlannerInput, world: &Scenario) -> Result<Plan> {
        run_stack(*self, input, world)
    }
}

/// Ignores everything and holds the current speed and heading. Useful as a
/// transparent target for search sanity checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct StraightLinePlanner;

impl Planner for StraightLinePlanner {
    fn name(&self) -> String {
        "straight".into()
    }

    fn uses_sweeps(&self) -> bool {
        false
    }

    fn plan(&self, input: &PlannerInput, _world: &Scenario) -> Result<Plan> {
        let s0 = *input.current_state()?;
        let (sin, cos) = s0.theta.sin_cos();
        let states = (0..=input.n_future)
            .map(|j| {
                let d = s0.v * input.dt * j as f64;
                BicycleState {
                    x: s0.x + d * cos,
                    y: s0.y + d * sin,
                    a: 0.0,
                    kappa: 0.0,
                    ..s0
                }
            })
            .collect();
        Ok(Plan {
            trajectory: crate::scenario::Trajectory::new(states),
            cost: 0.0,
            breakdown: CostBreakdown::default(),
            candidate: 0,
            unavoidable: false,
        })
    }
}
