//! Both stacks on the occluding-bus scene: the sensor stack cannot see the
//! car behind the bus.
use advscen::adversary::loss::collision_steps;
use advscen::autonomy::{detect, run_stack, CostWeights, PlannerInput, StackKind};
use advscen::sensorsim::{simulate, LidarConfig};
use std::collections::BTreeMap;

fn main() -> advscen::Result<()> {
    let sc = advscen::toy::occluding_bus();
    let sweeps = simulate(&sc, &BTreeMap::new(), &LidarConfig::default())?;
    for s in &sweeps {
        println!("frame {}: {} detections", s.frame, detect(s).len());
    }
    let input = PlannerInput::from_scenario(&sc, sweeps, CostWeights::default());
    for kind in StackKind::ALL {
        let plan = run_stack(kind, &input, &sc)?;
        let end = plan.trajectory.states.last().unwrap();
        println!(
            "{kind:>12}: candidate {:>3}, end speed {:.1} m/s, colliding steps {}",
            plan.candidate,
            end.v,
            collision_steps(&plan.trajectory, sc.sdv_footprint, &sc)?
        );
    }
    Ok(())
}
