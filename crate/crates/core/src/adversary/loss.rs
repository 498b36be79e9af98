//! Adversarial objective: imitation, collision and safety terms evaluated on
//! the plan the stack under test chose.

use crate::error::{Error, Result};
use crate::kinematics::{speed_jerk, PhysicalBounds};
use crate::scenario::geometry::Footprint;
use crate::scenario::{HdMap, Scenario, Trajectory};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Cost per plan step in which the SDV overlaps an actor.
pub const COLLISION_STEP_COST: f64 = 10.0;
/// Jerk above which the safety term starts charging, m/s^3.
pub const JERK_THRESHOLD: f64 = 2.0;

/// Quadratic below 1, linear above, continuous with slope 1 at the kink.
pub fn smooth_l1(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        0.5 * a * a
    } else {
        a - 0.5
    }
}

/// The expert's states from the current step to the end of the horizon,
/// aligned with plan indices.
pub fn expert_future(scenario: &Scenario) -> Trajectory {
    let cur = scenario.current_index();
    Trajectory::new(scenario.sdv_expert.states[cur..=cur + scenario.n_future].to_vec())
}

fn check_aligned(plan: &Trajectory, len: usize, what: &str) -> Result<()> {
    if plan.len() != len {
        return Err(Error::Validation(format!("plan has {} states, {what} horizon has {len}", plan.len())));
    }
    Ok(())
}

/// Sum of smooth-L1 waypoint distances over plan steps 1..; step 0 is the
/// shared current state.
pub fn imitation_cost(plan: &Trajectory, expert: &Trajectory) -> Result<f64> {
    check_aligned(plan, expert.len(), "expert")?;
    Ok(plan
        .states
        .iter()
        .zip(&expert.states)
        .skip(1)
        .map(|(p, e)| smooth_l1(p.position().distance(e.position())))
        .sum())
}

/// Number of plan steps at which the SDV overlaps any actor, times
/// [`COLLISION_STEP_COST`]. Plan step `j` is world step `current + j`.
pub fn collision_steps(plan: &Trajectory, sdv: Footprint, world: &Scenario) -> Result<usize> {
    check_aligned(plan, world.n_future + 1, "world")?;
    let cur = world.current_index();
    Ok((1..plan.len())
        .filter(|&j| {
            let b = sdv.at(plan.pose(j));
            world.actors.iter().any(|a| a.box_at(cur + j).overlaps(&b))
        })
        .count())
}

pub fn collision_cost(plan: &Trajectory, sdv: Footprint, world: &Scenario) -> Result<f64> {
    Ok(COLLISION_STEP_COST * collision_steps(plan, sdv, world)? as f64)
}

/// Per plan step: off-road indicator plus lateral-acceleration and jerk
/// excess over their thresholds.
pub fn safety_cost(plan: &Trajectory, map: &HdMap, dt: f64, bounds: &PhysicalBounds) -> f64 {
    let jerk = speed_jerk(&plan.states, dt);
    (1..plan.len())
        .map(|j| {
            let s = &plan.states[j];
            let off_road = if map.is_on_road(s.position()) { 0.0 } else { 1.0 };
            let lat = (s.lateral_accel().abs() - bounds.max_lateral_accel).max(0.0);
            // speed_jerk()[k] is centered on state k + 1.
            let jk = jerk.get(j - 1).map_or(0.0, |x| (x.abs() - JERK_THRESHOLD).max(0.0));
            off_road + lat + jk
        })
        .sum()
}

/// Which terms enter the adversarial loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectiveMask {
    pub imitation: bool,
    pub collision: bool,
    pub safety: bool,
}

impl ObjectiveMask {
    pub const M0: Self = Self::new(true, true, true);
    pub const M1: Self = Self::new(true, false, false);
    pub const M2: Self = Self::new(false, true, false);
    pub const M3: Self = Self::new(true, true, false);
    pub const M4: Self = Self::new(false, false, true);
    pub const M5: Self = Self::new(false, true, true);
    pub const NONE: Self = Self::new(false, false, false);
    pub const ALL: [Self; 6] = [Self::M0, Self::M1, Self::M2, Self::M3, Self::M4, Self::M5];

    pub const fn new(imitation: bool, collision: bool, safety: bool) -> Self {
        Self { imitation, collision, safety }
    }

    pub fn name(&self) -> Option<&'static str> {
        const NAMES: [&str; 6] = ["M0", "M1", "M2", "M3", "M4", "M5"];
        Self::ALL.iter().position(|m| m == self).map(|i| NAMES[i])
    }
}

impl Default for ObjectiveMask {
    fn default() -> Self {
        Self::M3
    }
}

impl fmt::Display for ObjectiveMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => f.write_str(n),
            None => write!(f, "il={},col={},safety={}", self.imitation, self.collision, self.safety),
        }
    }
}

impl FromStr for ObjectiveMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let i = match s.to_ascii_uppercase().as_str() {
            "M0" => 0,
            "M1" => 1,
            "M2" => 2,
            "M3" => 3,
            "M4" => 4,
            "M5" => 5,
            _ => return Err(Error::Config(format!("unknown objective mask {s:?} (expected M0..M5)"))),
        };
        Ok(Self::ALL[i])
    }
}

/// Unmasked terms plus the masked total.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub imitation: f64,
    pub collision: f64,
    pub safety: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(imitation: f64, collision: f64, safety: f64, mask: ObjectiveMask) -> Self {
        let pick = |on: bool, v: f64| if on { v } else { 0.0 };
        Self {
            imitation,
            collision,
            safety,
            total: pick(mask.imitation, imitation) + pick(mask.collision, collision) + pick(mask.safety, safety),
        }
    }
}

/// Scores `plan` (the stack's own optimum) against the world it was
/// planned in.
pub fn adversarial_loss(
    plan: &Trajectory,
    world: &Scenario,
    mask: ObjectiveMask,
    bounds: &PhysicalBounds,
) -> Result<LossBreakdown> {
    let il = imitation_cost(plan, &expert_future(world))?;
    let col = collision_cost(plan, world.sdv_footprint, world)?;
    let safety = safety_cost(plan, &world.map, world.dt, bounds);
    Ok(LossBreakdown::new(il, col, safety, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::BicycleState;
    use crate::scenario::geometry::Vec2;
    use crate::toy;

    fn shifted(t: &Trajectory, dy: f64) -> Trajectory {
        Trajectory::new(t.states.iter().map(|s| BicycleState { y: s.y + dy, ..*s }).collect())
    }

    #[test]
    fn smooth_l1_branches() {
        assert_eq!(smooth_l1(0.0), 0.0);
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(-3.0), 2.5);
        assert!((smooth_l1(1.0 - 1e-12) - smooth_l1(1.0)).abs() < 1e-11);
    }

    #[test]
    fn imitation_closed_forms() {
        let sc = toy::open_road(0);
        let e = expert_future(&sc);
        assert_eq!(imitation_cost(&e, &e).unwrap(), 0.0);
        let mut p = shifted(&e, 0.5);
        p.states[0] = e.states[0];
        assert!((imitation_cost(&p, &e).unwrap() - 1.25).abs() < 1e-12);
        let mut p = shifted(&e, 3.0);
        p.states[0] = e.states[0];
        assert!((imitation_cost(&p, &e).unwrap() - 25.0).abs() < 1e-12);
        assert!(imitation_cost(&Trajectory::new(e.states[..3].to_vec()), &e).is_err());
    }

    #[test]
    fn collision_counts_steps() {
        let sc = toy::open_road(0);
        let e = expert_future(&sc);
        assert_eq!(collision_cost(&e, sc.sdv_footprint, &sc).unwrap(), 0.0);
        // Park a car on the expert path at plan steps 4 and 5 only.
        let cur = sc.current_index();
        let mut states = toy::constant_velocity(-50.0, 9.0, 0.0, 0.0).states;
        for j in [4, 5] {
            let p = e.states[j].position();
            states[cur + j].x = p.x;
            states[cur + j].y = p.y;
        }
        let mut world = sc.clone();
        world.actors.push(crate::scenario::Actor {
            id: 9,
            footprint: toy::CAR,
            trajectory: Trajectory::new(states),
            is_perturbable: true,
        });
        assert_eq!(collision_cost(&e, sc.sdv_footprint, &world).unwrap(), 20.0);
    }

    #[test]
    fn safety_is_zero_for_gentle_plan_and_counts_off_road() {
        let sc = toy::open_road(0);
        let e = expert_future(&sc);
        let b = PhysicalBounds::default();
        assert_eq!(safety_cost(&e, &sc.map, sc.dt, &b), 0.0);
        let mut p = e.clone();
        for j in 8..=10 {
            p.states[j].y = 30.0;
        }
        assert!(safety_cost(&p, &sc.map, sc.dt, &b) >= 3.0);
        assert!(!sc.map.is_on_road(Vec2::new(0.0, 30.0)));
    }

    #[test]
    fn masks_follow_term_matrix() {
        let l = |m| LossBreakdown::new(1.5, 20.0, 0.25, m).total;
        assert_eq!(l(ObjectiveMask::M0), 21.75);
        assert_eq!(l(ObjectiveMask::M1), 1.5);
        assert_eq!(l(ObjectiveMask::M2), 20.0);
        assert_eq!(l(ObjectiveMask::M3), 21.5);
        assert_eq!(l(ObjectiveMask::M4), 0.25);
        assert_eq!(l(ObjectiveMask::M5), 20.25);
        assert_eq!(l(ObjectiveMask::NONE), 0.0);
        assert_eq!(ObjectiveMask::default(), ObjectiveMask::M3);
        for m in ObjectiveMask::ALL {
            assert_eq!(m.to_string().parse::<ObjectiveMask>().unwrap(), m);
        }
    }
}
