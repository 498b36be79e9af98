use advscen::autonomy::{run_stack, CostWeights, PlannerInput, StackKind};
use advscen::scenario::rng::RandomSource;
use advscen::sensorsim::{simulate, LidarConfig};
use advscen::toy::{self, SceneBuilder, LANE_WIDTH};
use rand::Rng;
use std::collections::BTreeMap;

/// Side-lane traffic on a wide road, nothing between the sensor and any car.
fn open_scene(seed: u64) -> advscen::scenario::Scenario {
    let mut r = RandomSource::new(seed).rng();
    let v = r.random_range(5.0..10.0);
    let mut b = SceneBuilder::new(toy::road_map(5), v);
    let mut id = 1;
    for lane in [-2.0 * LANE_WIDTH, -LANE_WIDTH, LANE_WIDTH, 2.0 * LANE_WIDTH] {
        if r.random_bool(0.7) {
            let x = r.random_range(-10.0..30.0);
            b = b.car(id, x, lane, v + r.random_range(-1.5..1.5));
            id += 1;
        }
    }
    b.build()
}

#[test]
fn stacks_agree_on_open_scenes() {
    for seed in 0..10 {
        let sc = open_scene(seed);
        let sweeps = simulate(&sc, &BTreeMap::new(), &LidarConfig::default()).unwrap();
        let input = PlannerInput::from_scenario(&sc, sweeps, CostWeights::default());
        let gt = run_stack(StackKind::GroundTruth, &input, &sc).unwrap();
        let sensor = run_stack(StackKind::Sensor, &input, &sc).unwrap();
        let worst = gt
            .trajectory
            .states
            .iter()
            .zip(&sensor.trajectory.states)
            .map(|(a, b)| a.position().distance(b.position()))
            .fold(0.0, f64::max);
        assert!(worst < 0.5, "seed {seed}: plans differ by {worst} m");
    }
}

#[test]
fn plans_are_deterministic() {
    let sc = toy::two_actors_at(3.0, 15.0);
    let sweeps = simulate(&sc, &BTreeMap::new(), &LidarConfig::default()).unwrap();
    let input = PlannerInput::from_scenario(&sc, sweeps, CostWeights::default());
    for kind in StackKind::ALL {
        assert_eq!(run_stack(kind, &input, &sc).unwrap(), run_stack(kind, &input, &sc).unwrap());
    }
}
