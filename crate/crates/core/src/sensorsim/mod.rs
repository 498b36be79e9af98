//! Planar single-ring LiDAR simulation and sweep editing.
//!
//! Sweeps are edited in range-image space: actors are removed by deleting
//! their points and filling the emptied rays from a background render, and
//! inserted by min-merging a render of the actors alone, which also carves
//! their shadows out of whatever lay behind them.

mod edit;
pub mod format;
mod raycast;

pub use edit::{add_actors, apply_dropout, remove_actors, remove_actors_with_fill, simulate, SensorSimulator};
pub use raycast::{merge_min, raycast, raycast_rays, render_frame};

use crate::scenario::geometry::{Polygon, Pose, Vec2};
use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const DEFAULT_N_RAYS: usize = 720;
pub const DEFAULT_MAX_RANGE: f64 = 100.0;

/// What a ray hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    NoReturn,
    Background,
    Actor(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            n_rays: DEFAULT_N_RAYS,
            max_range: DEFAULT_MAX_RANGE,
        }
    }
}

/// Sensor-relative angle of ray `i`.
pub fn ray_angle(i: usize, n_rays: usize) -> f64 {
    TAU * i as f64 / n_rays as f64
}

/// Nearest ray index for a sensor-relative angle.
pub fn ray_bin(angle: f64, n_rays: usize) -> usize {
    let k = (angle / TAU * n_rays as f64).round() as i64;
    k.rem_euclid(n_rays as i64) as usize
}

/// Per-ray nearest-hit distances; `f64::INFINITY` means no return.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    pub pose: Pose,
    pub ranges: Vec<f64>,
    pub tags: Vec<Tag>,
}

impl RangeImage {
    pub fn empty(pose: Pose, n_rays: usize) -> Self {
        Self {
            pose,
            ranges: vec![f64::INFINITY; n_rays],
            tags: vec![Tag::NoReturn; n_rays],
        }
    }

    pub fn n_rays(&self) -> usize {
        self.ranges.len()
    }

    pub fn returns(&self) -> usize {
        self.ranges.iter().filter(|r| r.is_finite()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Sensor-frame coordinates.
    pub x: f64,
    pub y: f64,
    pub tag: Tag,
}

impl SweepPoint {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// One LiDAR frame as a point cloud in the sensor frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub pose: Pose,
    pub frame: usize,
    pub n_rays: usize,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    pub fn from_range_image(img: &RangeImage, frame: usize) -> Self {
        let n = img.n_rays();
        let points = img
            .ranges
            .iter()
            .zip(&img.tags)
            .enumerate()
            .filter(|(_, (r, _))| r.is_finite())
            .map(|(i, (&r, &tag))| {
                let d = Vec2::from_angle(ray_angle(i, n)) * r;
                SweepPoint { x: d.x, y: d.y, tag }
            })
            .collect();
        Self {
            pose: img.pose,
            frame,
            n_rays: n,
            points,
        }
    }

    /// Bins points into rays by nearest angle; the closest point wins a bin.
    pub fn to_range_image(&self) -> RangeImage {
        let mut img = RangeImage::empty(self.pose, self.n_rays);
        for p in &self.points {
            let i = ray_bin(p.y.atan2(p.x), self.n_rays);
            let r = p.x.hypot(p.y);
            if r < img.ranges[i] {
                img.ranges[i] = r;
                img.tags[i] = p.tag;
            }
        }
        img
    }

    pub fn world_point(&self, p: &SweepPoint) -> Vec2 {
        self.pose.transform_point(p.position())
    }

    pub fn count_tag(&self, tag: Tag) -> usize {
        self.points.iter().filter(|p| p.tag == tag).count()
    }
}

/// A polygon with the tag its returns carry.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPolygon {
    pub tag: Tag,
    pub polygon: Polygon,
    center: Vec2,
    radius: f64,
}

impl TaggedPolygon {
    pub fn new(tag: Tag, polygon: Polygon) -> Self {
        let (center, radius) = polygon.centroid_and_radius();
        Self {
            tag,
            polygon,
            center,
            radius,
        }
    }
}

/// World geometry visible to the LiDAR at one instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneGeometry {
    pub polygons: Vec<TaggedPolygon>,
}

impl SceneGeometry {
    pub fn push(&mut self, tag: Tag, polygon: Polygon) {
        self.polygons.push(TaggedPolygon::new(tag, polygon));
    }

    pub fn statics(scenario: &Scenario) -> Self {
        let mut g = Self::default();
        for o in &scenario.map.obstacles {
            g.push(Tag::Background, o.clone());
        }
        g
    }

    /// Static geometry plus the footprints at step `t` of the actors for
    /// which `include` holds.
    pub fn from_scenario(scenario: &Scenario, t: usize, include: impl Fn(u32) -> bool) -> Self {
        let mut g = Self::statics(scenario);
        g.extend_actors(scenario, t, include);
        g
    }

    pub fn actors_only(scenario: &Scenario, t: usize, include: impl Fn(u32) -> bool) -> Self {
        let mut g = Self::default();
        g.extend_actors(scenario, t, include);
        g
    }

    fn extend_actors(&mut self, scenario: &Scenario, t: usize, include: impl Fn(u32) -> bool) {
        for a in scenario.actors.iter().filter(|a| include(a.id)) {
            self.push(Tag::Actor(a.id), a.box_at(t).to_polygon());
        }
    }

    pub fn is_valid(&self) -> bool {
        self.polygons.iter().all(|p| p.polygon.is_valid())
    }
}
