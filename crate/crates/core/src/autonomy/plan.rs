use super::{Obstacle, PlannerInput};
use crate::error::{Error, Result};
use crate::kinematics::{speed_jerk, step, BicycleState, Control, PhysicalBounds};
use crate::scenario::geometry::wrap_angle;
use crate::scenario::{HdMap, Lane, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const LATERAL_OFFSETS: [f64; 5] = [-3.0, -1.5, 0.0, 1.5, 3.0];
/// Terminal-speed targets relative to the current speed; `None` is a stop.
pub const SPEED_DELTAS: [Option<f64>; 8] = [None, Some(-6.0), Some(-4.0), Some(-2.0), Some(0.0), Some(1.0), Some(2.0), Some(4.0)];
pub const ACCEL_CAPS: [f64; 5] = [0.4, 0.8, 1.2, 1.6, 2.0];
pub const N_CANDIDATES: usize = LATERAL_OFFSETS.len() * SPEED_DELTAS.len() * ACCEL_CAPS.len();
/// SDV footprint inflation for collision checks, meters.
pub const COLLISION_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub collision: f64,
    pub lane: f64,
    pub progress: f64,
    pub comfort: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            collision: 1000.0,
            lane: 1.0,
            progress: 5.0,
            comfort: 0.1,
        }
    }
}

/// Weighted cost terms; they sum to the plan cost.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub collision: f64,
    pub lane: f64,
    pub progress: f64,
    pub comfort: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.collision + self.lane + self.progress + self.comfort
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    /// `n_future + 1` states; index 0 is the current SDV state.
    pub trajectory: Trajectory,
    pub cost: f64,
    pub breakdown: CostBreakdown,
    pub candidate: usize,
    /// Every candidate collided; this is the least bad one.
    pub unavoidable: bool,
}

/// Reference lane for the SDV; candidates are laid out relative to it.
fn reference_lane<'m>(map: &'m HdMap, s0: &BicycleState) -> Option<&'m Lane> {
    map.lane_for(&s0.pose())
}

fn lookahead(v: f64) -> f64 {
    (1.5 * v).max(6.0)
}

/// Curvature-rate command steering toward a point on the offset lane path.
fn steer(s: &BicycleState, lane: Option<&Lane>, offset: f64, dt: f64) -> f64 {
    let target_kappa = match lane {
        Some(lane) => {
            let proj = lane.project(s.position());
            let ld = lookahead(s.v);
            let (target, _) = lane.point_at(proj.station + ld, offset);
            let rel = target - s.position();
            let alpha = wrap_angle(rel.y.atan2(rel.x) - s.theta);
            2.0 * alpha.sin() / rel.norm().max(1e-6)
        }
        None => 0.0,
    };
    (target_kappa - s.kappa) / dt
}

/// The fixed candidate set: lateral offset outermost, then terminal speed,
/// then acceleration cap. Every candidate is a bicycle rollout and so
/// satisfies the physical bounds.
pub fn candidates(input: &PlannerInput) -> Result<Vec<Trajectory>> {
    let s0 = *input.current_state()?;
    let lane = reference_lane(input.map, &s0);
    let bounds = &input.bounds;
    let mut out = Vec::with_capacity(N_CANDIDATES);
    for &offset in &LATERAL_OFFSETS {
        for dv in &SPEED_DELTAS {
            let v_target = dv.map_or(0.0, |d| (s0.v + d).clamp(0.0, bounds.max_speed));
            for &cap in &ACCEL_CAPS {
                out.push(unroll(&s0, lane, offset, v_target, cap, input.n_future, input.dt, bounds));
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn unroll(
    s0: &BicycleState,
    lane: Option<&Lane>,
    offset: f64,
    v_target: f64,
    cap: f64,
    n: usize,
    dt: f64,
    bounds: &PhysicalBounds,
) -> Trajectory {
    let mut states = Vec::with_capacity(n + 1);
    let mut s = *s0;
    states.push(s);
    let mut events = 0;
    for _ in 0..n {
        let accel = ((v_target - s.v) / dt).clamp(-cap, cap);
        let c = Control::new(accel, steer(&s, lane, offset, dt));
        s = step(&s, &c, dt, bounds, &mut events);
        states.push(s);
    }
    Trajectory::new(states)
}

/// Scores one candidate against the obstacle set.
pub fn score_candidate(traj: &Trajectory, input: &PlannerInput, obstacles: &[Obstacle]) -> CostBreakdown {
    let w = &input.weights;
    let fp = input.sdv_footprint.inflated(COLLISION_MARGIN);
    let n = traj.len() - 1;
    let mut collisions = 0usize;
    let mut lane = 0.0;
    let mut length = 0.0;
    let mut latacc = 0.0;
    for j in 1..=n {
        let s = &traj.states[j];
        let sdv = fp.at(s.pose());
        if obstacles.iter().any(|o| o.box_at(j).is_some_and(|b| b.overlaps(&sdv))) {
            collisions += 1;
        }
        let off = input.map.centerline_offset(s.position());
        if off.is_finite() {
            lane += off * off;
        }
        length += s.position().distance(traj.states[j - 1].position());
        latacc += s.lateral_accel().powi(2);
    }
    let jerk: f64 = speed_jerk(&traj.states, input.dt).iter().map(|j| j * j).sum();
    let v0 = traj.states[0].v;
    let shortfall = (v0 * n as f64 * input.dt - length).max(0.0);
    CostBreakdown {
        collision: w.collision * collisions as f64,
        lane: w.lane * lane,
        progress: w.progress * shortfall,
        comfort: w.comfort * (jerk + latacc),
    }
}

/// Minimum-cost candidate; ties go to the lowest candidate index.
pub fn plan(input: &PlannerInput, obstacles: &[Obstacle]) -> Result<Plan> {
    if input.n_future == 0 {
        return Err(Error::Validation("planning horizon must be at least one step".into()));
    }
    let cands = candidates(input)?;
    let scored: Vec<CostBreakdown> = cands.par_iter().map(|c| score_candidate(c, input, obstacles)).collect();
    let (best, breakdown) = scored
        .iter()
        .enumerate()
        .fold(None::<(usize, &CostBreakdown)>, |acc, (i, b)| match acc {
            Some((_, a)) if a.total() <= b.total() => acc,
            _ => Some((i, b)),
        })
        .expect("candidate set is never empty");
    let unavoidable = scored.iter().all(|b| b.collision > 0.0);
    Ok(Plan {
        trajectory: cands[best].clone(),
        cost: breakdown.total(),
        breakdown: *breakdown,
        candidate: best,
        unavoidable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autonomy::ground_truth_obstacles;
    use crate::kinematics::check_bounds;
    use crate::toy;

    #[test]
    fn candidate_count_and_bounds() {
        let sc = toy::single_actor_straight();
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        let cands = candidates(&input).unwrap();
        assert_eq!(cands.len(), 200);
        for c in &cands {
            assert_eq!(c.len(), sc.n_future + 1);
            assert_eq!(c.states[0], sc.sdv_expert.states[sc.current_index()]);
            assert_eq!(check_bounds(c, sc.dt, &input.bounds), None);
        }
    }

    #[test]
    fn empty_road_keeps_lane_and_speed() {
        let sc = toy::open_road(0);
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        let p = plan(&input, &[]).unwrap();
        assert_eq!(p.breakdown.collision, 0.0);
        assert!(!p.unavoidable);
        for (s, e) in p.trajectory.states.iter().zip(&sc.sdv_expert.states[sc.current_index()..]) {
            assert!(s.y.abs() < 1e-9);
            assert!((s.v - 10.0).abs() < 1e-9);
            assert!(s.position().distance(e.position()) < 1e-9);
        }
    }

    #[test]
    fn lane_changes_converge() {
        let sc = toy::open_road(0);
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        let cands = candidates(&input).unwrap();
        let per_offset = N_CANDIDATES / LATERAL_OFFSETS.len();
        let left = &cands[4 * per_offset + 4 * ACCEL_CAPS.len()];
        let end = left.states.last().unwrap();
        assert!((end.y - 3.0).abs() < 0.6, "ended at y = {}", end.y);
    }

    #[test]
    fn stopped_lead_vehicle_is_avoided() {
        let expert = toy::track(0.0, 0.0, 0.0, |k| if k < 0 { 6.0 } else { (6.0 - k as f64).max(0.0) });
        let sc = toy::SceneBuilder::with_expert(toy::three_lane_map(), expert)
            .car(1, 20.0, 0.0, 0.0)
            .build();
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        let obstacles = ground_truth_obstacles(&sc);
        let p = plan(&input, &obstacles).unwrap();
        assert_eq!(p.breakdown.collision, 0.0);
        // The planner is an argmin: re-score every candidate.
        let cands = candidates(&input).unwrap();
        let costs: Vec<f64> = cands.iter().map(|c| score_candidate(c, &input, &obstacles).total()).collect();
        let first_min = costs.iter().enumerate().fold(0, |b, (i, c)| if *c < costs[b] { i } else { b });
        assert_eq!(p.candidate, first_min);
        assert_eq!(p.cost, costs[first_min]);
        assert!(costs[SPEED_DELTAS.iter().position(|d| *d == Some(0.0)).unwrap() * ACCEL_CAPS.len() + 2 * 40] > 1000.0);
    }

    #[test]
    fn obstacle_order_does_not_matter() {
        let sc = toy::two_actors_at(3.0, 15.0);
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        let mut obstacles = ground_truth_obstacles(&sc);
        let a = plan(&input, &obstacles).unwrap();
        obstacles.reverse();
        assert_eq!(plan(&input, &obstacles).unwrap(), a);
        assert_eq!(plan(&input, &obstacles).unwrap(), a);
    }

    #[test]
    fn unavoidable_flag_when_boxed() {
        let sc = toy::open_road(0);
        let input = PlannerInput::from_scenario(&sc, vec![], CostWeights::default());
        // A wall of obstacles sitting on the SDV at every step.
        let wall = Obstacle {
            footprint: crate::scenario::geometry::Footprint::new(200.0, 40.0),
            poses: vec![crate::scenario::geometry::Pose::default(); sc.n_future + 1],
        };
        let p = plan(&input, &[wall]).unwrap();
        assert!(p.unavoidable);
        assert_eq!(p.breakdown.collision, 1000.0 * sc.n_future as f64);
    }
}
