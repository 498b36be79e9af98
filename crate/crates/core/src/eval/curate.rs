//! Picking the most interactive 6 s window from a longer log.
//!
//! Each window is scored by sampling SDV trajectories for three lane-frame
//! behaviors and measuring how many of them would hit an actor. Collisions
//! with the vehicle directly ahead in the SDV's lane and with static vehicles
//! do not count: those are trivially avoidable and say nothing about the
//! interaction.

use crate::error::{Error, Result};
use crate::scenario::geometry::Pose;
use crate::scenario::{Actor, RandomSource, Scenario, Trajectory, DEFAULT_N_HISTORY};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const WINDOW_SECONDS: f64 = 6.0;
pub const STRIDE_SECONDS: f64 = 2.0;
pub const CANDIDATES_PER_BEHAVIOR: usize = 100;
/// Vehicles never faster than this over the window count as static, m/s.
pub const STATIC_SPEED: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    KeepLane,
    LeftChange,
    RightChange,
}

impl Behavior {
    pub const ALL: [Behavior; 3] = [Behavior::KeepLane, Behavior::LeftChange, Behavior::RightChange];

    fn lanes(self) -> f64 {
        match self {
            Behavior::KeepLane => 0.0,
            Behavior::LeftChange => 1.0,
            Behavior::RightChange => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curation {
    /// Log step at which the chosen window starts.
    pub start: usize,
    /// Collision fraction of every window, in start order.
    pub scores: Vec<(usize, f64)>,
    pub scenario: Scenario,
}

fn steps(seconds: f64, dt: f64) -> usize {
    (seconds / dt).round() as usize
}

/// The window of `len` states starting at log step `start`, with the
/// default observation history.
pub fn window(log: &Scenario, start: usize, len: usize) -> Result<Scenario> {
    if start + len > log.horizon() || len <= DEFAULT_N_HISTORY {
        return Err(Error::Validation(format!(
            "window {start}..{} does not fit a log of {} states",
            start + len,
            log.horizon()
        )));
    }
    let cut = |t: &Trajectory| Trajectory::new(t.states[start..start + len].to_vec());
    Ok(Scenario {
        map: log.map.clone(),
        actors: log
            .actors
            .iter()
            .map(|a| Actor {
                trajectory: cut(&a.trajectory),
                ..a.clone()
            })
            .collect(),
        sdv_expert: cut(&log.sdv_expert),
        sdv_footprint: log.sdv_footprint,
        dt: log.dt,
        n_history: DEFAULT_N_HISTORY,
        n_future: len - DEFAULT_N_HISTORY,
    })
}

/// Actors that may count as collision partners in `sc`.
fn relevant_actors(sc: &Scenario) -> Vec<&Actor> {
    let cur = sc.current_index();
    let ego = sc.sdv_expert.pose(cur);
    let lane = sc.map.lane_for(&ego);
    let ego_proj = lane.map(|l| l.project(ego.position()));
    // Directly ahead: nearest actor ahead within the SDV's lane.
    let ahead = match (lane, ego_proj) {
        (Some(l), Some(e)) => sc
            .actors
            .iter()
            .filter_map(|a| {
                let p = l.project(a.trajectory.pose(cur).position());
                let gap = p.station - e.station;
                (gap > 0.0 && (p.lateral - e.lateral).abs() < 0.5 * l.width).then_some((a.id, gap))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id),
        _ => None,
    };
    sc.actors
        .iter()
        .filter(|a| Some(a.id) != ahead)
        .filter(|a| a.trajectory.states.iter().any(|s| s.v > STATIC_SPEED))
        .collect()
}

/// Lane-frame SDV trajectory: constant acceleration `accel` along the lane
/// and a smooth lateral shift of `shift` meters completed after `t_change`.
fn candidate(sc: &Scenario, accel: f64, shift: f64, t_change: f64) -> Vec<Pose> {
    let cur = sc.current_index();
    let s0 = sc.sdv_expert.states[cur];
    let Some(lane) = sc.map.lane_for(&s0.pose()) else {
        return Vec::new();
    };
    let p0 = lane.project(s0.position());
    let mut arc = 0.0;
    let mut v = s0.v;
    (1..=sc.n_future)
        .map(|j| {
            arc += v * sc.dt;
            v = (v + accel * sc.dt).clamp(0.0, 15.0);
            let u = (j as f64 * sc.dt / t_change).min(1.0);
            let smooth = u * u * (3.0 - 2.0 * u);
            let (p, heading) = lane.point_at(p0.station + arc, p0.lateral + shift * smooth);
            Pose::new(p.x, p.y, heading)
        })
        .collect()
}

/// Fraction of sampled SDV trajectories, pooled over the three behaviors,
/// that overlap a relevant actor.
pub fn window_score(sc: &Scenario, rng: &RandomSource) -> f64 {
    let actors = relevant_actors(sc);
    let cur = sc.current_index();
    let width = sc
        .map
        .lane_for(&sc.sdv_expert.pose(cur))
        .map_or(0.0, |l| l.width);
    let mut r = rng.rng();
    let mut hits = 0usize;
    let mut total = 0usize;
    for b in Behavior::ALL {
        for _ in 0..CANDIDATES_PER_BEHAVIOR {
            let accel = r.random_range(-2.0..=1.0);
            let shift = b.lanes() * width + r.random_range(-0.5..=0.5);
            let t_change = r.random_range(2.0..=4.0);
            total += 1;
            if actors.is_empty() {
                continue;
            }
            let poses = candidate(sc, accel, shift, t_change);
            let hit = poses.iter().enumerate().any(|(k, pose)| {
                let sdv = sc.sdv_footprint.at(*pose);
                actors.iter().any(|a| a.box_at(cur + k + 1).overlaps(&sdv))
            });
            hits += hit as usize;
        }
    }
    hits as f64 / total as f64
}

/// Slides a 6 s window every 2 s and returns the one with the highest
/// collision fraction; ties go to the earliest window.
pub fn curate(log: &Scenario, rng: &RandomSource) -> Result<Curation> {
    let len = steps(WINDOW_SECONDS, log.dt);
    let stride = steps(STRIDE_SECONDS, log.dt).max(1);
    if log.horizon() < len {
        return Err(Error::Validation(format!(
            "log of {:.1} s is shorter than the {WINDOW_SECONDS} s window",
            log.horizon() as f64 * log.dt
        )));
    }
    let mut scores = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for start in (0..=log.horizon() - len).step_by(stride) {
        let sc = window(log, start, len)?;
        let s = window_score(&sc, &rng.split_indexed("curate-window", start as u64));
        scores.push((start, s));
        if best.is_none_or(|b| s > b.1) {
            best = Some((start, s));
        }
    }
    let start = best.map_or(0, |b| b.0);
    Ok(Curation {
        start,
        scores,
        scenario: window(log, start, len)?,
    })
}
