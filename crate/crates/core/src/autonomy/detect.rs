use crate::scenario::geometry::{wrap_angle, Footprint, Pose, Vec2};
use crate::sensorsim::{Sweep, Tag};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Single-linkage distance threshold.
    pub cluster_distance: f64,
    /// Clusters with fewer points are dropped.
    pub min_points: usize,
    /// Box size assumed for faces that are only partly visible.
    pub size_prior: Footprint,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            cluster_distance: 0.7,
            min_points: 5,
            size_prior: Footprint::new(4.5, 2.0),
        }
    }
}

/// An oriented box in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub center: Vec2,
    pub heading: f64,
    /// Half length along `heading`, half width across it.
    pub half_extent: Vec2,
    pub n_points: usize,
}

impl Detection {
    pub fn pose(&self) -> Pose {
        Pose::new(self.center.x, self.center.y, self.heading)
    }

    pub fn footprint(&self) -> Footprint {
        Footprint::new(2.0 * self.half_extent.x, 2.0 * self.half_extent.y)
    }
}

pub fn detect(sweep: &Sweep) -> Vec<Detection> {
    detect_with(sweep, &DetectorConfig::default())
}

/// Clusters non-background returns and fits a box to each large-enough
/// cluster. Output order follows the first point of each cluster.
pub fn detect_with(sweep: &Sweep, cfg: &DetectorConfig) -> Vec<Detection> {
    let pts: Vec<Vec2> = sweep
        .points
        .iter()
        .filter(|p| p.tag != Tag::Background && p.tag != Tag::NoReturn)
        .map(|p| sweep.world_point(p))
        .collect();
    let sensor = sweep.pose.position();
    clusters(&pts, cfg.cluster_distance)
        .into_iter()
        .filter(|c| c.len() >= cfg.min_points)
        .map(|c| {
            let cp: Vec<Vec2> = c.iter().map(|&i| pts[i]).collect();
            fit_box(&cp, sensor, cfg.size_prior)
        })
        .collect()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clusters as index lists, ordered by smallest member.
fn clusters(pts: &[Vec2], d: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let d2 = d * d;
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i] - pts[j]).norm_sq() <= d2 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

struct Spans {
    u: (f64, f64),
    v: (f64, f64),
}

fn spans(pts: &[Vec2], theta: f64) -> Spans {
    let (ax, ay) = (Vec2::from_angle(theta), Vec2::from_angle(theta + FRAC_PI_2));
    let mut s = Spans {
        u: (f64::INFINITY, f64::NEG_INFINITY),
        v: (f64::INFINITY, f64::NEG_INFINITY),
    };
    for p in pts {
        let (u, v) = (p.dot(ax), p.dot(ay));
        s.u = (s.u.0.min(u), s.u.1.max(u));
        s.v = (s.v.0.min(v), s.v.1.max(v));
    }
    s
}

/// Grows `span` to at least `size`, away from the sensor coordinate `s`.
fn extend(span: (f64, f64), size: f64, s: f64) -> (f64, f64) {
    let (lo, hi) = span;
    if hi - lo >= size {
        (lo, hi)
    } else if s <= lo {
        (lo, lo + size)
    } else if s >= hi {
        (hi - size, hi)
    } else {
        let mid = 0.5 * (lo + hi);
        (mid - 0.5 * size, mid + 0.5 * size)
    }
}

/// Best-fitting rectangle over a set of candidate orientations, then grown
/// to the size prior on the side hidden from the sensor.
fn fit_box(pts: &[Vec2], sensor: Vec2, prior: Footprint) -> Detection {
    let fold = |a: f64| a.rem_euclid(FRAC_PI_2);
    let mut angles: Vec<f64> = (0..90).map(|k| (k as f64).to_radians()).collect();
    angles.extend(pts.windows(2).filter(|w| w[0] != w[1]).map(|w| {
        let d = w[1] - w[0];
        fold(d.y.atan2(d.x))
    }));
    // Sum of point distances to the nearest rectangle edge. Unlike area,
    // this is not fooled by the hypotenuse of an L-shaped return.
    let closeness = |t: f64| {
        let s = spans(pts, t);
        let (ax, ay) = (Vec2::from_angle(t), Vec2::from_angle(t + FRAC_PI_2));
        pts.iter()
            .map(|p| {
                let (u, v) = (p.dot(ax), p.dot(ay));
                let du = (u - s.u.0).min(s.u.1 - u);
                let dv = (v - s.v.0).min(s.v.1 - v);
                du.min(dv)
            })
            .sum::<f64>()
    };
    let mut theta = angles[0];
    let mut best = closeness(theta);
    for &t in &angles[1..] {
        let a = closeness(t);
        if a < best - 1e-9 {
            best = a;
            theta = t;
        }
    }

    let s = spans(pts, theta);
    let (eu, ev) = (s.u.1 - s.u.0, s.v.1 - s.v.0);
    let clearly_long = prior.width + 0.3;
    let length_on_u = if eu.max(ev) > clearly_long {
        eu >= ev
    } else {
        // Only an end face or a short stretch of side is visible. A face
        // seen edge-on from the sensor is a side; one seen face-on is an end.
        let centroid = pts.iter().fold(Vec2::default(), |a, &p| a + p) * (1.0 / pts.len() as f64);
        let los = (centroid - sensor).dot(Vec2::from_angle(if eu >= ev { theta } else { theta + FRAC_PI_2 }));
        let face_along_los = los.abs() > (centroid - sensor).norm() * FRAC_PI_4.cos();
        (eu >= ev) == face_along_los
    };
    let (len_size, wid_size) = (prior.length, prior.width);
    let (su, sv) = (
        sensor.dot(Vec2::from_angle(theta)),
        sensor.dot(Vec2::from_angle(theta + FRAC_PI_2)),
    );
    let (u_size, v_size) = if length_on_u { (len_size, wid_size) } else { (wid_size, len_size) };
    let u = extend(s.u, u_size, su);
    let v = extend(s.v, v_size, sv);
    let (cu, cv) = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
    let center = Vec2::from_angle(theta) * cu + Vec2::from_angle(theta + FRAC_PI_2) * cv;
    let (hu, hv) = (0.5 * (u.1 - u.0), 0.5 * (v.1 - v.0));
    let (heading, half_extent) = if length_on_u {
        (theta, Vec2::new(hu, hv))
    } else {
        (theta + FRAC_PI_2, Vec2::new(hv, hu))
    };
    Detection {
        center,
        heading: wrap_angle(heading),
        half_extent,
        n_points: pts.len(),
    }
}
