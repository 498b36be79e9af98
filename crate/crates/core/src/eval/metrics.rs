//! Per-scenario plan metrics: collision within 3 s / 5 s, distance to the
//! human (expert) trajectory, and comfort.

use crate::adversary::loss::expert_future;
use crate::error::{Error, Result};
use crate::kinematics::speed_jerk;
use crate::scenario::geometry::wrap_angle;
use crate::scenario::{in_roi, Scenario, Trajectory};
use serde::{Deserialize, Serialize};

/// Plan step at 3 s and 5 s for the default 0.5 s step.
pub const STEP_3S: usize = 6;
pub const STEP_5S: usize = 10;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub collision_3s: bool,
    pub collision_5s: bool,
    pub l2_3s: f64,
    pub l2_5s: f64,
    /// Mean |longitudinal jerk|, m/s^3.
    pub jerk: f64,
    /// Mean |lateral acceleration|, m/s^2.
    pub lat_accel: f64,
}

/// Means over rows; collision entries are rates in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n: usize,
    pub collision_3s: f64,
    pub collision_5s: f64,
    pub l2_3s: f64,
    pub l2_5s: f64,
    pub jerk: f64,
    pub lat_accel: f64,
}

impl MetricsSummary {
    pub fn of<'a>(rows: impl IntoIterator<Item = &'a MetricsRow>) -> Self {
        let mut s = Self::default();
        for r in rows {
            s.n += 1;
            s.collision_3s += r.collision_3s as u8 as f64;
            s.collision_5s += r.collision_5s as u8 as f64;
            s.l2_3s += r.l2_3s;
            s.l2_5s += r.l2_5s;
            s.jerk += r.jerk;
            s.lat_accel += r.lat_accel;
        }
        if s.n > 0 {
            let n = s.n as f64;
            for v in [&mut s.collision_3s, &mut s.collision_5s, &mut s.l2_3s, &mut s.l2_5s, &mut s.jerk, &mut s.lat_accel] {
                *v /= n;
            }
        }
        s
    }
}

/// First plan step (1-based) at which the SDV overlaps an actor inside the
/// region of interest around the SDV's current pose.
pub fn first_collision(plan: &Trajectory, world: &Scenario) -> Option<usize> {
    let cur = world.current_index();
    let ego = world.sdv_expert.pose(cur);
    (1..plan.len()).find(|&j| {
        let sdv = world.sdv_footprint.at(plan.pose(j));
        world.actors.iter().any(|a| {
            let pose = a.trajectory.pose(cur + j);
            in_roi(ego.inverse_transform_point(pose.position())) && a.box_at(cur + j).overlaps(&sdv)
        })
    })
}

/// Scores `plan` (n_future + 1 states from the current step) in `world`.
pub fn score(name: &str, plan: &Trajectory, world: &Scenario) -> Result<MetricsRow> {
    let expert = expert_future(world);
    if plan.len() != expert.len() {
        return Err(Error::Validation(format!("plan has {} states, expected {}", plan.len(), expert.len())));
    }
    let l2_at = |j: usize| {
        let j = j.min(plan.len() - 1);
        plan.states[j].position().distance(expert.states[j].position())
    };
    let collision = first_collision(plan, world);
    let jerk = speed_jerk(&plan.states, world.dt);
    let lat: Vec<f64> = plan
        .states
        .windows(2)
        .map(|w| w[0].v * wrap_angle(w[1].theta - w[0].theta) / world.dt)
        .collect();
    let mean_abs = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64 };
    Ok(MetricsRow {
        scenario: name.to_string(),
        collision_3s: collision.is_some_and(|j| j <= STEP_3S),
        collision_5s: collision.is_some_and(|j| j <= STEP_5S),
        l2_3s: l2_at(STEP_3S),
        l2_5s: l2_at(STEP_5S),
        jerk: mean_abs(&jerk),
        lat_accel: mean_abs(&lat),
    })
}
