//! LiDAR re-simulation: move the bus out of the way and watch the hidden car
//! appear in the sweep.
use advscen::scenario::geometry::Pose;
use advscen::sensorsim::{format, LidarConfig, SensorSimulator, Tag};
use advscen::toy::{self, BUS_ACTOR, HIDDEN_ACTOR};
use std::collections::BTreeMap;

fn main() -> advscen::Result<()> {
    let sc = toy::occluding_bus();
    let sim = SensorSimulator::new(&sc, LidarConfig::default());
    let count = |sweeps: &[advscen::sensorsim::Sweep]| sweeps.iter().map(|s| s.count_tag(Tag::Actor(HIDDEN_ACTOR))).sum::<usize>();
    let original = sim.simulate(&BTreeMap::new())?;
    println!("hidden car returns, original: {}", count(&original));

    let moved = sc.actor(BUS_ACTOR)?.trajectory.transformed(&Pose::new(-40.0, 0.0, 0.0));
    let edited = sim.simulate(&BTreeMap::from([(BUS_ACTOR, moved)]))?;
    println!("hidden car returns, bus moved back 40 m: {}", count(&edited));

    let path = std::env::temp_dir().join("advscen_sweep.csv");
    format::save_sweep(&path, edited.last().unwrap())?;
    println!("last sweep ({} points) written to {}", edited.last().unwrap().points.len(), path.display());
    Ok(())
}
