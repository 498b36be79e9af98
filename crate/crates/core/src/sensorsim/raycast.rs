use super::{ray_angle, LidarConfig, RangeImage, SceneGeometry, Tag};
use crate::error::{Error, Result};
use crate::scenario::geometry::{Pose, Vec2};
use crate::scenario::Scenario;

const PARALLEL_EPS: f64 = 1e-14;

/// Distance along the unit ray `origin + t * dir` to segment `[a, b]`.
fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < PARALLEL_EPS {
        return None;
    }
    let w = a - origin;
    let t = w.cross(e) / denom;
    let s = w.cross(dir) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

fn cast_one(geometry: &SceneGeometry, origin: Vec2, dir: Vec2, max_range: f64) -> (f64, Tag) {
    let mut best = (f64::INFINITY, Tag::NoReturn);
    for poly in &geometry.polygons {
        // Bounding-circle cull.
        let oc = poly.center - origin;
        let along = oc.dot(dir);
        if along + poly.radius < 0.0 || along - poly.radius > best.0 {
            continue;
        }
        if oc.cross(dir).abs() > poly.radius {
            continue;
        }
        for (a, b) in poly.polygon.edges() {
            if let Some(t) = ray_segment(origin, dir, a, b) {
                if t < best.0 {
                    best = (t, poly.tag);
                }
            }
        }
    }
    if best.0 > max_range {
        (f64::INFINITY, Tag::NoReturn)
    } else {
        best
    }
}

/// Renders a range image: ray `i` points at `pose.theta + 2*pi*i/n_rays`.
pub fn raycast(geometry: &SceneGeometry, pose: Pose, n_rays: usize, max_range: f64) -> RangeImage {
    let mut img = RangeImage::empty(pose, n_rays);
    let origin = pose.position();
    for i in 0..n_rays {
        let dir = Vec2::from_angle(pose.theta + ray_angle(i, n_rays));
        let (r, tag) = cast_one(geometry, origin, dir, max_range);
        img.ranges[i] = r;
        img.tags[i] = tag;
    }
    img
}

/// Renders only the listed rays; every other ray is left as no-return.
pub fn raycast_rays(
    geometry: &SceneGeometry,
    pose: Pose,
    n_rays: usize,
    max_range: f64,
    rays: impl IntoIterator<Item = usize>,
) -> RangeImage {
    let mut img = RangeImage::empty(pose, n_rays);
    let origin = pose.position();
    for i in rays {
        let dir = Vec2::from_angle(pose.theta + ray_angle(i, n_rays));
        let (r, tag) = cast_one(geometry, origin, dir, max_range);
        img.ranges[i] = r;
        img.tags[i] = tag;
    }
    img
}

/// Element-wise minimum; no-return acts as the identity. On equal ranges
/// the tag of `a` is kept.
pub fn merge_min(a: &RangeImage, b: &RangeImage) -> Result<RangeImage> {
    if a.n_rays() != b.n_rays() {
        return Err(Error::RangeImageMismatch(format!(
            "{} rays vs {} rays",
            a.n_rays(),
            b.n_rays()
        )));
    }
    if a.pose != b.pose {
        return Err(Error::RangeImageMismatch(format!(
            "pose {:?} vs {:?}",
            a.pose, b.pose
        )));
    }
    let mut out = a.clone();
    for i in 0..a.n_rays() {
        if b.ranges[i] < out.ranges[i] {
            out.ranges[i] = b.ranges[i];
            out.tags[i] = b.tags[i];
        }
    }
    Ok(out)
}

/// From-scratch render of every actor plus static geometry at step `t`,
/// seen from the SDV expert pose at `t`.
pub fn render_frame(scenario: &Scenario, t: usize, lidar: &LidarConfig) -> RangeImage {
    let geometry = SceneGeometry::from_scenario(scenario, t, |_| true);
    raycast(&geometry, scenario.sdv_expert.pose(t), lidar.n_rays, lidar.max_range)
}
