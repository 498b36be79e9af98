//! Planar geometry: vectors, poses, oriented boxes and the separating-axis
//! overlap test used for every collision predicate in the crate.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar rigid pose.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        p.rotate(self.theta) + self.position()
    }

    /// Maps a parent-frame point into this pose's frame.
    pub fn inverse_transform_point(&self, p: Vec2) -> Vec2 {
        (p - self.position()).rotate(-self.theta)
    }

    /// Composition `self ∘ other`: `other` is expressed in this pose's frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        let p = self.transform_point(other.position());
        Pose::new(p.x, p.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose {
        let p = (-self.position()).rotate(-self.theta);
        Pose::new(p.x, p.y, -self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Rectangle extents of a vehicle, centered on its reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub const fn new(length: f64, width: f64) -> Self {
        Self { length, width }
    }

    pub fn inflated(&self, margin: f64) -> Self {
        Self::new(self.length + 2.0 * margin, self.width + 2.0 * margin)
    }

    pub fn at(&self, pose: Pose) -> OrientedBox {
        OrientedBox::new(pose, *self)
    }
}

/// A footprint placed at a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec2,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedBox {
    pub fn new(pose: Pose, footprint: Footprint) -> Self {
        Self {
            center: pose.position(),
            heading: pose.theta,
            half_length: 0.5 * footprint.length,
            half_width: 0.5 * footprint.width,
        }
    }

    pub fn axes(&self) -> (Vec2, Vec2) {
        let u = Vec2::from_angle(self.heading);
        (u, u.perp())
    }

    /// Corners in counter-clockwise order starting front-left.
    pub fn corners(&self) -> [Vec2; 4] {
        let (u, v) = self.axes();
        let a = u * self.half_length;
        let b = v * self.half_width;
        [
            self.center + a + b,
            self.center - a + b,
            self.center - a - b,
            self.center + a - b,
        ]
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_with_tolerance(p, 0.0)
    }

    pub fn contains_with_tolerance(&self, p: Vec2, tol: f64) -> bool {
        let (u, v) = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= self.half_length + tol && d.dot(v).abs() <= self.half_width + tol
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(self.corners().to_vec())
    }

    fn projection_radius(&self, axis: Vec2) -> f64 {
        let (u, v) = self.axes();
        self.half_length * u.dot(axis).abs() + self.half_width * v.dot(axis).abs()
    }

    /// Separating-axis test. Touching boxes count as overlapping.
    pub fn overlaps(&self, other: &OrientedBox) -> bool {
        let (u1, v1) = self.axes();
        let (u2, v2) = other.axes();
        let d = other.center - self.center;
        [u1, v1, u2, v2].into_iter().all(|axis| {
            d.dot(axis).abs() <= self.projection_radius(axis) + other.projection_radius(axis)
        })
    }
}

/// Collision predicate on two placed footprints.
pub fn polygon_overlap(a: Footprint, pose_a: Pose, b: Footprint, pose_b: Pose) -> bool {
    a.at(pose_a).overlaps(&b.at(pose_b))
}

/// Simple polygon, vertices in order (either winding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub points: Vec<Vec2>,
}

impl Polygon {
    pub fn new(points: Vec<Vec2>) -> Self {
        Self { points }
    }

    pub fn rectangle(center: Vec2, heading: f64, length: f64, width: f64) -> Self {
        Footprint::new(length, width)
            .at(Pose::new(center.x, center.y, heading))
            .to_polygon()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn centroid_and_radius(&self) -> (Vec2, f64) {
        let n = self.points.len().max(1) as f64;
        let c = self
            .points
            .iter()
            .fold(Vec2::default(), |acc, &p| acc + p)
            * (1.0 / n);
        let r = self
            .points
            .iter()
            .map(|p| p.distance(c))
            .fold(0.0, f64::max);
        (c, r)
    }

    /// Even-odd rule.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn transformed(&self, pose: &Pose) -> Polygon {
        Polygon::new(self.points.iter().map(|&p| pose.transform_point(p)).collect())
    }

    pub fn is_valid(&self) -> bool {
        self.points.len() >= 3
            && self.points.iter().all(|p| p.is_finite())
            && self.signed_area().abs() > 1e-12
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}
