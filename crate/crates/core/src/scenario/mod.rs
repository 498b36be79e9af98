//! Scenario domain types shared by every other module.

pub mod geometry;
pub mod io;
pub mod rng;

use crate::error::{Error, Result};
use crate::kinematics::BicycleState;
use geometry::{point_segment_distance, wrap_angle, Footprint, OrientedBox, Polygon, Pose, Vec2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;

pub use rng::RandomSource;

pub const DEFAULT_DT: f64 = 0.5;
pub const DEFAULT_N_HISTORY: usize = 2;
pub const DEFAULT_N_FUTURE: usize = 10;

/// Region of interest in the SDV frame used by metrics, meters.
pub const ROI_X: (f64, f64) = (-72.0, 72.0);
pub const ROI_Y: (f64, f64) = (-40.0, 40.0);

pub fn in_roi(p: Vec2) -> bool {
    (ROI_X.0..=ROI_X.1).contains(&p.x) && (ROI_Y.0..=ROI_Y.1).contains(&p.y)
}

/// Uniformly time-spaced kinematic states.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<BicycleState>,
}

impl Trajectory {
    pub fn new(states: Vec<BicycleState>) -> Self {
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.states.iter().map(|s| s.position())
    }

    pub fn pose(&self, t: usize) -> Pose {
        self.states[t].pose()
    }

    pub fn transformed(&self, g: &Pose) -> Self {
        Self::new(self.states.iter().map(|s| s.transformed(g)).collect())
    }

    /// Sum over states of squared waypoint distance. Both trajectories must
    /// have the same length.
    pub fn squared_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a.position() - b.position()).norm_sq())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub id: u32,
    pub footprint: Footprint,
    pub trajectory: Trajectory,
    #[serde(default = "default_true")]
    pub is_perturbable: bool,
}

fn default_true() -> bool {
    true
}

impl Actor {
    pub fn box_at(&self, t: usize) -> OrientedBox {
        self.footprint.at(self.trajectory.pose(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneProjection {
    /// Arc length along the centerline to the foot point.
    pub station: f64,
    /// Signed offset, positive to the left of travel direction.
    pub lateral: f64,
    /// Centerline heading at the foot point.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub centerline: Vec<Vec2>,
    pub width: f64,
}

impl Lane {
    pub fn new(centerline: Vec<Vec2>, width: f64) -> Self {
        Self { centerline, width }
    }

    pub fn straight(start: Vec2, end: Vec2, width: f64) -> Self {
        Self::new(vec![start, end], width)
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        self.centerline
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.distance(p) <= 0.5 * self.width
    }

    /// Frenet coordinates of `p` relative to the closest centerline segment.
    /// Station extrapolates linearly before the first and past the last vertex.
    pub fn project(&self, p: Vec2) -> LaneProjection {
        let n_seg = self.centerline.len().saturating_sub(1);
        let mut best_d = f64::INFINITY;
        let mut best = LaneProjection { station: 0.0, lateral: 0.0, heading: 0.0 };
        let mut station0 = 0.0;
        for (i, w) in self.centerline.windows(2).enumerate() {
            let ab = w[1] - w[0];
            let len = ab.norm();
            if len == 0.0 {
                continue;
            }
            let dir = ab * (1.0 / len);
            let along = (p - w[0]).dot(dir);
            let t = along.clamp(0.0, len);
            let d = p.distance(w[0] + dir * t);
            if d < best_d {
                best_d = d;
                let s = if (i == 0 && along < 0.0) || (i + 1 == n_seg && along > len) {
                    along
                } else {
                    t
                };
                best = LaneProjection {
                    station: station0 + s,
                    lateral: dir.cross(p - w[0]),
                    heading: dir.y.atan2(dir.x),
                };
            }
            station0 += len;
        }
        best
    }

    /// Point at `station` along the centerline shifted `lateral` to the left,
    /// with the centerline heading there. Extrapolates past either end.
    pub fn point_at(&self, station: f64, lateral: f64) -> (Vec2, f64) {
        let n_seg = self.centerline.len().saturating_sub(1);
        let mut s0 = 0.0;
        for (i, w) in self.centerline.windows(2).enumerate() {
            let ab = w[1] - w[0];
            let len = ab.norm();
            if len == 0.0 {
                continue;
            }
            if station <= s0 + len || i + 1 == n_seg {
                let dir = ab * (1.0 / len);
                let p = w[0] + dir * (station - s0) + dir.perp() * lateral;
                return (p, dir.y.atan2(dir.x));
            }
            s0 += len;
        }
        (self.centerline.first().copied().unwrap_or_default(), 0.0)
    }

    pub fn length(&self) -> f64 {
        self.centerline.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HdMap {
    pub lanes: Vec<Lane>,
    /// Static background geometry (buildings, parked props) seen by LiDAR.
    #[serde(default)]
    pub obstacles: Vec<Polygon>,
}

impl HdMap {
    /// A point is on-road iff it lies within half-width of some lane centerline.
    pub fn is_on_road(&self, p: Vec2) -> bool {
        self.lanes.iter().any(|l| l.contains(p))
    }

    /// Lane the pose is driving in: nearest centerline among lanes whose
    /// heading agrees with the pose to within 60 degrees, falling back to the
    /// nearest lane overall.
    pub fn lane_for(&self, pose: &Pose) -> Option<&Lane> {
        let p = pose.position();
        let aligned = self
            .lanes
            .iter()
            .filter(|l| wrap_angle(l.project(p).heading - pose.theta).abs() < std::f64::consts::FRAC_PI_3)
            .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)));
        aligned.or_else(|| {
            self.lanes
                .iter()
                .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
        })
    }

    /// Distance to the nearest lane centerline.
    pub fn centerline_offset(&self, p: Vec2) -> f64 {
        self.lanes
            .iter()
            .map(|l| l.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn transformed(&self, g: &Pose) -> Self {
        Self {
            lanes: self
                .lanes
                .iter()
                .map(|l| Lane::new(l.centerline.iter().map(|&p| g.transform_point(p)).collect(), l.width))
                .collect(),
            obstacles: self.obstacles.iter().map(|o| o.transformed(g)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (i, lane) in self.lanes.iter().enumerate() {
            if lane.centerline.len() < 2 {
                return Err(Error::Validation(format!("lane {i} has fewer than 2 points")));
            }
            if !(lane.width.is_finite() && lane.width > 0.0) {
                return Err(Error::Validation(format!("lane {i} width must be positive")));
            }
            if lane.centerline.iter().any(|p| !p.is_finite()) {
                return Err(Error::Validation(format!("lane {i} has non-finite points")));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_valid() {
                return Err(Error::Validation(format!("obstacle {i} is degenerate")));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_SDV_FOOTPRINT: Footprint = Footprint::new(4.5, 2.0);

fn default_sdv_footprint() -> Footprint {
    DEFAULT_SDV_FOOTPRINT
}

/// The unit of attack: map, actors, the recorded SDV trajectory and timing.
/// All trajectories span `n_history + n_future` states; index
/// `n_history - 1` is the current (planning) time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub map: HdMap,
    pub actors: Vec<Actor>,
    pub sdv_expert: Trajectory,
    #[serde(default = "default_sdv_footprint")]
    pub sdv_footprint: Footprint,
    pub dt: f64,
    pub n_history: usize,
    pub n_future: usize,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.n_history + self.n_future
    }

    /// Index of the current time step.
    pub fn current_index(&self) -> usize {
        self.n_history - 1
    }

    pub fn actor(&self, id: u32) -> Result<&Actor> {
        self.actors
            .iter()
            .find(|a| a.id == id)
            .ok_or(Error::UnknownActor(id))
    }

    pub fn actor_index(&self, id: u32) -> Result<usize> {
        self.actors
            .iter()
            .position(|a| a.id == id)
            .ok_or(Error::UnknownActor(id))
    }

    pub fn sdv_box_at(&self, t: usize) -> OrientedBox {
        self.sdv_footprint.at(self.sdv_expert.pose(t))
    }

    /// Copy with some actor trajectories replaced.
    pub fn with_trajectories<'a>(
        &self,
        replaced: impl IntoIterator<Item = (u32, &'a Trajectory)>,
    ) -> Result<Scenario> {
        let mut out = self.clone();
        for (id, traj) in replaced {
            let idx = out.actor_index(id)?;
            out.actors[idx].trajectory = traj.clone();
        }
        Ok(out)
    }

    /// Applies a rigid transform to every geometric quantity.
    pub fn transformed(&self, g: &Pose) -> Scenario {
        Scenario {
            map: self.map.transformed(g),
            actors: self
                .actors
                .iter()
                .map(|a| Actor {
                    trajectory: a.trajectory.transformed(g),
                    ..a.clone()
                })
                .collect(),
            sdv_expert: self.sdv_expert.transformed(g),
            ..self.clone()
        }
    }

    /// Re-expresses the scenario in the SDV frame at the current step.
    pub fn in_sdv_frame(&self) -> Scenario {
        let pose = self.sdv_expert.pose(self.current_index());
        self.transformed(&pose.inverse())
    }

    /// Stable content hash, hex encoded.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every structural invariant plus non-collision of the recording.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_history < 1 || self.n_future < 1 {
            return Err(Error::Validation("n_history and n_future must be >= 1".into()));
        }
        let horizon = self.horizon();
        self.map.validate()?;
        check_trajectory("sdv_expert", &self.sdv_expert, horizon)?;
        check_footprint("sdv_footprint", &self.sdv_footprint)?;
        let mut ids = BTreeSet::new();
        for a in &self.actors {
            if !ids.insert(a.id) {
                return Err(Error::Validation(format!("duplicate actor id {}", a.id)));
            }
            check_trajectory(&format!("actor {}", a.id), &a.trajectory, horizon)?;
            check_footprint(&format!("actor {} footprint", a.id), &a.footprint)?;
        }
        for t in 0..horizon {
            let sdv = self.sdv_box_at(t);
            for (i, a) in self.actors.iter().enumerate() {
                let ba = a.box_at(t);
                if ba.overlaps(&sdv) {
                    return Err(Error::Validation(format!(
                        "actor {} overlaps the SDV at step {t}",
                        a.id
                    )));
                }
                if let Some(b) = self.actors[i + 1..].iter().find(|b| b.box_at(t).overlaps(&ba)) {
                    return Err(Error::Validation(format!(
                        "actors {} and {} overlap at step {t}",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_trajectory(name: &str, traj: &Trajectory, horizon: usize) -> Result<()> {
    if traj.len() != horizon {
        return Err(Error::Validation(format!(
            "state count mismatch for {name}: expected {horizon}, got {}",
            traj.len()
        )));
    }
    if let Some(i) = traj.states.iter().position(|s| !s.is_finite()) {
        return Err(Error::Validation(format!("{name} state {i} is not finite")));
    }
    Ok(())
}

fn check_footprint(name: &str, f: &Footprint) -> Result<()> {
    if f.length > 0.0 && f.width > 0.0 && f.length.is_finite() && f.width.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must have positive extents")))
    }
}
