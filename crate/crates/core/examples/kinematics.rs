//! Bicycle rollouts, the feasible set of a perturbed actor, and projection.
use advscen::feasibility::{is_plausible, perturbed_trajectory, project_index, select_and_sample, DEFAULT_N_SAMPLE};
use advscen::kinematics::{rollout, BicycleState, Control, ControlSequence, Perturbation, PhysicalBounds};
use advscen::scenario::RandomSource;

fn main() -> advscen::Result<()> {
    let bounds = PhysicalBounds::default();
    let s0 = BicycleState::new(0.0, 0.0, 0.0, 7.0, 0.05, 0.0);
    let arc = rollout(&s0, &ControlSequence::constant(10, Control::new(0.0, 0.0)), 0.5, &bounds)?;
    let end = arc.trajectory.states.last().unwrap();
    println!("constant curvature 0.05 for 5 s at 7 m/s ends at ({:.2}, {:.2}), heading {:.3}", end.x, end.y, end.theta);

    let sc = advscen::toy::cut_in();
    let sets = select_and_sample(&sc, 1, DEFAULT_N_SAMPLE, &RandomSource::new(0), &bounds)?;
    let set = &sets[0];
    println!(
        "actor {}: {} of {} samples plausible ({:.1}%)",
        set.actor_id,
        set.len(),
        set.n_sample,
        100.0 * set.acceptance_rate()
    );

    // Full braking for the whole horizon, then the nearest plausible member.
    let mut delta = vec![0.0; advscen::kinematics::dim_for_steps(sc.n_future)];
    for k in 0..sc.n_future {
        delta[4 + 2 * k] = -1.0;
    }
    let raw = perturbed_trajectory(&sc, set.actor_id, &Perturbation::new(delta), &bounds)?;
    let i = project_index(&raw, set);
    println!("raw plausible: {:?}", is_plausible(&raw, &sc, set.actor_id).is_ok());
    println!("projected onto member {i}, distance^2 {:.2}", raw.squared_distance(&set.trajectories[i]));
    Ok(())
}
