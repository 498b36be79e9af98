use super::{Detection, Obstacle};
use crate::scenario::geometry::{Pose, Vec2};

/// Maximum center displacement between frames for two detections to be
/// considered the same object.
pub const ASSOCIATION_GATE: f64 = 3.0;

const MIN_HEADING_SPEED: f64 = 0.5;

/// Greedy nearest-neighbour matching of current detections to the previous
/// frame, then constant-velocity extrapolation for `n_future` steps.
///
/// `sensors[i]` is the sensor pose of `frames[i]`. The displacement is the
/// smaller of the world-frame and the sensor-frame one, so both stationary
/// objects and traffic keeping pace with the SDV associate at any ego speed;
/// velocities are world-frame.
pub fn forecast(frames: &[Vec<Detection>], sensors: &[Pose], n_future: usize, dt: f64) -> Vec<Obstacle> {
    let Some(current) = frames.last() else {
        return Vec::new();
    };
    let n = frames.len();
    let (previous, rel): (&[Detection], Option<(Pose, Pose)>) = if n >= 2 && sensors.len() == n {
        (&frames[n - 2][..], Some((sensors[n - 2], sensors[n - 1])))
    } else {
        (&[], None)
    };
    let local = |p: Vec2, pose: Option<Pose>| pose.map_or(p, |q| q.inverse_transform_point(p));

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, c) in current.iter().enumerate() {
        for (j, p) in previous.iter().enumerate() {
            let moving = local(c.center, rel.map(|r| r.1)).distance(local(p.center, rel.map(|r| r.0)));
            let d = moving.min(c.center.distance(p.center));
            if d <= ASSOCIATION_GATE {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut velocity = vec![Vec2::default(); current.len()];
    let mut used_cur = vec![false; current.len()];
    let mut used_prev = vec![false; previous.len()];
    for (_, i, j) in pairs {
        if !used_cur[i] && !used_prev[j] {
            used_cur[i] = true;
            used_prev[j] = true;
            velocity[i] = (current[i].center - previous[j].center) * (1.0 / dt);
        }
    }

    current
        .iter()
        .zip(velocity)
        .map(|(d, v)| {
            let heading = if v.norm() > MIN_HEADING_SPEED { v.y.atan2(v.x) } else { d.heading };
            Obstacle {
                footprint: d.footprint(),
                poses: (0..=n_future)
                    .map(|k| {
                        let p = d.center + v * (k as f64 * dt);
                        Pose::new(p.x, p.y, heading)
                    })
                    .collect(),
            }
        })
        .collect()
}
