use advscen::feasibility::{is_plausible, perturbed_trajectory, project_index, sample_feasible_set, select_and_sample};
use advscen::kinematics::{check_bounds, dim_for_steps, Perturbation, PhysicalBounds};
use advscen::scenario::RandomSource;
use advscen::toy;
use proptest::prelude::*;

fn delta(n_future: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, dim_for_steps(n_future))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Any normalized perturbation decodes to a full-horizon, in-bounds
    /// trajectory that starts at the actor's history length.
    #[test]
    fn every_delta_rolls_out_in_bounds(d in delta(10), seed in 0u64..50) {
        let sc = toy::random_scene(&RandomSource::new(seed), 3);
        let b = PhysicalBounds::default();
        let id = sc.actors[0].id;
        let t = perturbed_trajectory(&sc, id, &Perturbation::new(d), &b).unwrap();
        prop_assert_eq!(t.len(), sc.horizon());
        prop_assert!(check_bounds(&t, sc.dt, &b).is_none());
        prop_assert!(t.states.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn out_of_box_delta_is_rejected(extra in 1.0001f64..5.0, i in 0usize..24) {
        let sc = toy::cut_in();
        let mut d = vec![0.0; dim_for_steps(sc.n_future)];
        d[i] = extra;
        prop_assert!(perturbed_trajectory(&sc, 1, &Perturbation::new(d), &PhysicalBounds::default()).is_err());
    }
}

#[test]
fn members_pass_and_projection_is_a_retraction() {
    let b = PhysicalBounds::default();
    let sc = toy::dense_traffic();
    let sets = select_and_sample(&sc, 2, advscen::feasibility::DEFAULT_N_SAMPLE, &RandomSource::new(5), &b).unwrap();
    assert_eq!(sets.len(), 2);
    for set in &sets {
        for (i, t) in set.trajectories.iter().enumerate() {
            assert!(is_plausible(t, &sc, set.actor_id).is_ok());
            assert!(check_bounds(t, sc.dt, &b).is_none());
            assert_eq!(project_index(t, set), i);
        }
        // Sample indices are strictly increasing draws of the stream.
        assert!(set.sample_indices.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn sets_depend_on_seed_and_nothing_else() {
    let b = PhysicalBounds::default();
    let sc = toy::lead_vehicle();
    let a = sample_feasible_set(&sc, 1, 3000, &RandomSource::new(1), &b).unwrap();
    let again = sample_feasible_set(&sc, 1, 3000, &RandomSource::new(1), &b).unwrap();
    let other = sample_feasible_set(&sc, 1, 3000, &RandomSource::new(2), &b).unwrap();
    assert_eq!(a.trajectories, again.trajectories);
    assert_ne!(a.trajectories, other.trajectories);
}
