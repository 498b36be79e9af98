//! Built-in toy scenes. All are expressed in the SDV frame at the current
//! step: the SDV sits at the origin heading along +x.

use crate::kinematics::BicycleState;
use crate::scenario::geometry::{Footprint, Polygon, Vec2};
use crate::scenario::{Actor, HdMap, Lane, RandomSource, Scenario, Trajectory, DEFAULT_DT, DEFAULT_N_FUTURE, DEFAULT_N_HISTORY};
use rand::Rng;

pub const LANE_WIDTH: f64 = 3.0;
pub const CAR: Footprint = Footprint::new(4.5, 2.0);
pub const BUS: Footprint = Footprint::new(12.0, 2.5);

/// Actor id of the hidden vehicle in [`occluding_bus`].
pub const HIDDEN_ACTOR: u32 = 2;
pub const BUS_ACTOR: u32 = 1;
/// Actor id of the boxed-in vehicle in [`boxed_in`].
pub const BOXED_ACTOR: u32 = 1;

/// Constant-velocity, constant-heading track whose current-step state is
/// `(x, y)`.
pub fn constant_velocity(x: f64, y: f64, theta: f64, v: f64) -> Trajectory {
    track(x, y, theta, |_| v)
}

/// Straight track with a time-varying speed profile `speed(k)` where `k` is
/// the step offset from the current step (negative in the past). Positions
/// integrate speed with the same forward-Euler rule as the bicycle rollout.
pub fn track(x: f64, y: f64, theta: f64, speed: impl Fn(i64) -> f64) -> Trajectory {
    let dt = DEFAULT_DT;
    let cur = DEFAULT_N_HISTORY as i64 - 1;
    let horizon = (DEFAULT_N_HISTORY + DEFAULT_N_FUTURE) as i64;
    let dir = Vec2::from_angle(theta);
    // Arc length at step k relative to the current step.
    let arc = |k: i64| -> f64 {
        if k >= 0 {
            (0..k).map(|j| speed(j) * dt).sum()
        } else {
            -(k..0).map(|j| speed(j) * dt).sum::<f64>()
        }
    };
    let states = (0..horizon)
        .map(|i| {
            let k = i - cur;
            let p = Vec2::new(x, y) + dir * arc(k);
            let a = (speed(k + 1) - speed(k)) / dt;
            BicycleState::new(p.x, p.y, theta, speed(k), 0.0, a)
        })
        .collect();
    Trajectory::new(states)
}

/// `n` parallel lanes along +x, centered on y = 0 at `LANE_WIDTH` spacing,
/// with a row of buildings on both sides.
pub fn road_map(n: usize) -> HdMap {
    let half = (n as f64 - 1.0) / 2.0;
    let lanes = (0..n)
        .map(|i| {
            let y = (i as f64 - half) * LANE_WIDTH;
            Lane::straight(Vec2::new(-150.0, y), Vec2::new(250.0, y), LANE_WIDTH)
        })
        .collect();
    let edge = (half + 0.5) * LANE_WIDTH;
    let mut obstacles = Vec::new();
    for side in [-1.0, 1.0] {
        for i in 0..8 {
            let x = -60.0 + i as f64 * 25.0;
            obstacles.push(Polygon::rectangle(Vec2::new(x, side * (edge + 7.5)), 0.0, 18.0, 8.0));
        }
    }
    HdMap { lanes, obstacles }
}

/// Three lanes centered at y = -3, 0, 3.
pub fn three_lane_map() -> HdMap {
    road_map(3)
}

pub struct SceneBuilder {
    scenario: Scenario,
}

impl SceneBuilder {
    pub fn new(map: HdMap, sdv_speed: f64) -> Self {
        Self::with_expert(map, constant_velocity(0.0, 0.0, 0.0, sdv_speed))
    }

    pub fn with_expert(map: HdMap, sdv_expert: Trajectory) -> Self {
        Self {
            scenario: Scenario {
                map,
                actors: Vec::new(),
                sdv_expert,
                sdv_footprint: CAR,
                dt: DEFAULT_DT,
                n_history: DEFAULT_N_HISTORY,
                n_future: DEFAULT_N_FUTURE,
            },
        }
    }

    pub fn actor(mut self, id: u32, footprint: Footprint, trajectory: Trajectory, perturbable: bool) -> Self {
        self.scenario.actors.push(Actor {
            id,
            footprint,
            trajectory,
            is_perturbable: perturbable,
        });
        self
    }

    pub fn car(self, id: u32, x: f64, y: f64, v: f64) -> Self {
        self.actor(id, CAR, constant_velocity(x, y, 0.0, v), true)
    }

    pub fn build(self) -> Scenario {
        self.scenario
            .validate()
            .expect("toy scene satisfies scenario invariants");
        self.scenario
    }
}

/// Straight three-lane road with `n` cars in the side lanes.
pub fn open_road(n: usize) -> Scenario {
    let mut b = SceneBuilder::new(three_lane_map(), 10.0);
    for i in 0..n {
        let lane = if i % 2 == 0 { -LANE_WIDTH } else { LANE_WIDTH };
        let x = 8.0 + 14.0 * (i / 2) as f64;
        b = b.car(i as u32 + 1, x, lane, 10.0);
    }
    b.build()
}

/// One car in the right lane, slightly ahead, on an otherwise empty
/// five-lane road.
pub fn single_actor_straight() -> Scenario {
    SceneBuilder::new(road_map(5), 10.0).car(1, 10.0, -LANE_WIDTH, 5.0).build()
}

/// Two cars whose closest approach to the SDV path is `near` and `far` meters.
pub fn two_actors_at(near: f64, far: f64) -> Scenario {
    SceneBuilder::new(road_map(5), 5.0)
        .car(2, far, 0.0, 5.0)
        .car(1, 0.0, -near, 5.0)
        .build()
}

/// A stationary car on a single-lane service road, boxed in by four parked
/// neighbours at 0.1 m gaps and closest to the SDV, plus one free car on the
/// main five-lane road further away.
pub fn boxed_in() -> Scenario {
    let mut map = road_map(5);
    let service_y = -30.0;
    map.lanes
        .push(Lane::straight(Vec2::new(-150.0, service_y), Vec2::new(250.0, service_y), LANE_WIDTH));
    let gap = 0.1;
    let dx = CAR.length + gap;
    let dy = CAR.width + gap;
    let parked = |x, y| constant_velocity(x, y, 0.0, 0.0);
    let mut b = SceneBuilder::new(map, 5.0).actor(BOXED_ACTOR, CAR, parked(0.0, service_y), true);
    for (id, x, y) in [(10, dx, 0.0), (11, -dx, 0.0), (12, 0.0, dy), (13, 0.0, -dy)] {
        b = b.actor(id, CAR, parked(x, service_y + y), false);
    }
    b.car(5, 40.0, LANE_WIDTH, 5.0).build()
}

/// Sensor-occlusion scene: a parked bus in the right lane hides a car that
/// will cross the SDV lane at an intersection ahead.
pub fn occluding_bus() -> Scenario {
    let mut map = three_lane_map();
    map.lanes.push(Lane::straight(Vec2::new(28.0, -60.0), Vec2::new(28.0, 60.0), LANE_WIDTH));
    map.obstacles.retain(|o| {
        let (c, r) = o.centroid_and_radius();
        (c.x - 28.0).abs() > r + 3.0
    });
    // The logged driver saw the car and braked at 2 m/s^2 to a stop.
    let expert = track(0.0, 0.0, 0.0, |k| if k < 0 { 8.0 } else { (8.0 - k as f64).max(0.0) });
    SceneBuilder::with_expert(map, expert)
        .actor(BUS_ACTOR, BUS, constant_velocity(12.0, -LANE_WIDTH, 0.0, 0.0), false)
        .actor(
            HIDDEN_ACTOR,
            CAR,
            constant_velocity(28.0, -8.0, std::f64::consts::FRAC_PI_2, 2.0),
            true,
        )
        .build()
}

/// Speed profile that holds `v0` through the current step, then changes at
/// `accel` m/s^2 until reaching `v1`.
pub fn ramp(v0: f64, v1: f64, accel: f64) -> impl Fn(i64) -> f64 {
    move |k| {
        if k <= 0 {
            v0
        } else {
            let v = v0 + accel * DEFAULT_DT * k as f64;
            if accel < 0.0 {
                v.max(v1)
            } else {
                v.min(v1)
            }
        }
    }
}

/// A car in the right lane just ahead of the SDV; the logged driver eased
/// off as it drifted closer.
pub fn cut_in() -> Scenario {
    SceneBuilder::with_expert(three_lane_map(), track(0.0, 0.0, 0.0, ramp(10.0, 6.0, -1.0)))
        .car(1, 7.0, -LANE_WIDTH, 10.0)
        .build()
}

/// A slower car ahead in the SDV lane.
pub fn lead_vehicle() -> Scenario {
    SceneBuilder::new(three_lane_map(), 10.0).car(1, 22.0, 0.0, 8.0).build()
}

/// A faster car closing from behind in the left lane while the logged
/// driver slows down.
pub fn merge_from_left() -> Scenario {
    SceneBuilder::with_expert(three_lane_map(), track(0.0, 0.0, 0.0, ramp(9.0, 5.0, -1.0)))
        .car(1, -9.0, LANE_WIDTH, 12.0)
        .build()
}

/// A car on a crossing street with open corners; the logged driver yields
/// to it.
pub fn crossing() -> Scenario {
    let x = 32.0;
    let mut map = three_lane_map();
    map.lanes.push(Lane::straight(Vec2::new(x, -60.0), Vec2::new(x, 60.0), LANE_WIDTH));
    map.obstacles.retain(|o| {
        let (c, r) = o.centroid_and_radius();
        (c.x - x).abs() > r + 12.0
    });
    let expert = track(0.0, 0.0, 0.0, ramp(10.0, 0.0, -2.0));
    SceneBuilder::with_expert(map, expert)
        .actor(1, CAR, constant_velocity(x, -14.0, std::f64::consts::FRAC_PI_2, 5.0), true)
        .build()
}

/// Two-car traffic around the SDV.
pub fn dense_traffic() -> Scenario {
    SceneBuilder::new(three_lane_map(), 9.0)
        .car(1, 11.0, -LANE_WIDTH, 8.0)
        .car(2, -6.0, LANE_WIDTH, 10.0)
        .build()
}

/// The six-scene suite used by benchmarks and acceptance checks, in a fixed
/// order.
pub fn suite() -> Vec<(&'static str, Scenario)> {
    vec![
        ("cut_in", cut_in()),
        ("lead_vehicle", lead_vehicle()),
        ("merge_from_left", merge_from_left()),
        ("crossing", crossing()),
        ("occluding_bus", occluding_bus()),
        ("dense_traffic", dense_traffic()),
    ]
}

/// Suite scene by name.
pub fn by_name(name: &str) -> Option<Scenario> {
    suite().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}

/// A straight-road log of `steps` states at the default step with a 10 m/s
/// SDV starting at the origin; each `(x0, y, v)` is a car driving along +x
/// at constant speed. Observation history is the default two steps.
pub fn long_log(steps: usize, cars: &[(f64, f64, f64)]) -> Scenario {
    let line = |x0: f64, y: f64, v: f64| {
        Trajectory::new(
            (0..steps)
                .map(|i| BicycleState::new(x0 + v * DEFAULT_DT * i as f64, y, 0.0, v, 0.0, 0.0))
                .collect(),
        )
    };
    let mut sc = Scenario {
        map: three_lane_map(),
        actors: Vec::new(),
        sdv_expert: line(0.0, 0.0, 10.0),
        sdv_footprint: CAR,
        dt: DEFAULT_DT,
        n_history: DEFAULT_N_HISTORY,
        n_future: steps - DEFAULT_N_HISTORY,
    };
    for (i, &(x0, y, v)) in cars.iter().enumerate() {
        sc.actors.push(Actor {
            id: i as u32 + 1,
            footprint: CAR,
            trajectory: line(x0, y, v),
            is_perturbable: true,
        });
    }
    sc.validate().expect("toy log satisfies scenario invariants");
    sc
}

/// Random straight-road scene with up to `max_actors` non-colliding cars.
pub fn random_scene(rng: &RandomSource, max_actors: usize) -> Scenario {
    let mut r = rng.rng();
    let sdv_speed = r.random_range(4.0..12.0);
    let mut b = SceneBuilder::new(three_lane_map(), sdv_speed);
    let n = r.random_range(1..=max_actors.max(1));
    let mut id = 1;
    let mut attempts = 0;
    while (id as usize) <= n && attempts < 200 {
        attempts += 1;
        let lane = [-LANE_WIDTH, 0.0, LANE_WIDTH][r.random_range(0..3)];
        let x = r.random_range(-30.0..60.0);
        let v = r.random_range(0.0..12.0);
        let cand = Actor {
            id,
            footprint: CAR,
            trajectory: constant_velocity(x, lane, 0.0, v),
            is_perturbable: true,
        };
        let mut trial = b.scenario.clone();
        trial.actors.push(cand.clone());
        if trial.validate().is_ok() {
            b.scenario.actors.push(cand);
            id += 1;
        }
    }
    b.build()
}
