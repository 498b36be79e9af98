use advscen::feasibility::perturbed_trajectory;
use advscen::kinematics::{dim_for_steps, Perturbation, PhysicalBounds};
use advscen::scenario::geometry::Pose;
use advscen::scenario::RandomSource;
use advscen::sensorsim::{merge_min, render_frame, LidarConfig, RangeImage, SensorSimulator, Tag};
use advscen::toy;
use proptest::prelude::*;
use std::collections::BTreeMap;

const N: usize = 90;

fn image() -> impl Strategy<Value = RangeImage> {
    prop::collection::vec(prop::option::weighted(0.7, (0.1f64..120.0, 0u32..4)), N).prop_map(|rays| {
        let mut img = RangeImage::empty(Pose::default(), N);
        for (i, r) in rays.into_iter().enumerate() {
            if let Some((range, id)) = r {
                img.ranges[i] = range;
                img.tags[i] = if id == 0 { Tag::Background } else { Tag::Actor(id) };
            }
        }
        img
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_min_is_a_semilattice(a in image(), b in image(), c in image()) {
        let ab = merge_min(&a, &b).unwrap();
        prop_assert_eq!(&ab.ranges, &merge_min(&b, &a).unwrap().ranges);
        prop_assert_eq!(
            merge_min(&ab, &c).unwrap().ranges,
            merge_min(&a, &merge_min(&b, &c).unwrap()).unwrap().ranges
        );
        prop_assert_eq!(&merge_min(&a, &a).unwrap(), &a);
        prop_assert_eq!(&merge_min(&a, &RangeImage::empty(a.pose, N)).unwrap(), &a);
        // The tag travels with the winning range.
        for i in 0..N {
            if a.ranges[i] < b.ranges[i] {
                prop_assert_eq!(ab.tags[i], a.tags[i]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn edits_match_a_fresh_render(seed in 0u64..10_000, d in prop::collection::vec(-1.0f64..=1.0, dim_for_steps(10))) {
        let sc = toy::random_scene(&RandomSource::new(seed), 4);
        let lidar = LidarConfig::default();
        let id = sc.actors[(seed as usize) % sc.actors.len()].id;
        let t = perturbed_trajectory(&sc, id, &Perturbation::new(d), &PhysicalBounds::default()).unwrap();
        let perturbed = BTreeMap::from([(id, t.clone())]);
        let sweeps = SensorSimulator::new(&sc, lidar).simulate(&perturbed).unwrap();
        let world = sc.with_trajectories([(id, &t)]).unwrap();
        for (k, s) in sweeps.iter().enumerate() {
            let (x, y) = (s.to_range_image(), render_frame(&world, k, &lidar));
            for i in 0..x.n_rays() {
                let (p, q) = (x.ranges[i], y.ranges[i]);
                prop_assert!(p == q || (p - q).abs() < 1e-9, "frame {} ray {}: {} vs {}", k, i, p, q);
            }
        }
    }
}

#[test]
fn mismatched_images_do_not_merge() {
    let a = RangeImage::empty(Pose::default(), 8);
    let b = RangeImage::empty(Pose::default(), 9);
    assert!(merge_min(&a, &b).is_err());
}
