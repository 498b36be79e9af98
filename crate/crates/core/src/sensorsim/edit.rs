use super::raycast::{merge_min, raycast, raycast_rays};
use super::{ray_angle, ray_bin, LidarConfig, RangeImage, SceneGeometry, Sweep, SweepPoint, Tag};
use crate::scenario::geometry::Vec2;
use crate::error::{Error, Result};
use crate::scenario::geometry::OrientedBox;
use crate::scenario::{Scenario, Trajectory};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

// Ray hits land exactly on box edges; widen the inside test slightly.
const BOX_TOLERANCE: f64 = 1e-6;

fn strip_boxes(sweep: &Sweep, boxes: &[OrientedBox]) -> (Sweep, BTreeSet<usize>) {
    let mut holes = BTreeSet::new();
    let mut kept = Vec::with_capacity(sweep.points.len());
    for p in &sweep.points {
        let w = sweep.world_point(p);
        if boxes.iter().any(|b| b.contains_with_tolerance(w, BOX_TOLERANCE)) {
            holes.insert(ray_bin(p.y.atan2(p.x), sweep.n_rays));
        } else {
            kept.push(*p);
        }
    }
    let out = Sweep {
        points: kept,
        ..sweep.clone()
    };
    (out, holes)
}

fn fill_holes(stripped: &Sweep, holes: &BTreeSet<usize>, fill: &RangeImage) -> Sweep {
    // Untouched rays keep their points bit-for-bit.
    let img = stripped.to_range_image();
    let mut out = stripped.clone();
    for &i in holes {
        if fill.ranges[i] < img.ranges[i] {
            out.points.retain(|p| ray_bin(p.y.atan2(p.x), out.n_rays) != i);
            out.points.push(ray_point(i, fill.n_rays(), fill.ranges[i], fill.tags[i]));
        }
    }
    out
}

fn ray_point(i: usize, n_rays: usize, range: f64, tag: Tag) -> SweepPoint {
    let d = Vec2::from_angle(ray_angle(i, n_rays)) * range;
    SweepPoint { x: d.x, y: d.y, tag }
}

/// Deletes every point inside `boxes` and re-renders the emptied rays
/// against `background`.
pub fn remove_actors(sweep: &Sweep, boxes: &[OrientedBox], background: &SceneGeometry, max_range: f64) -> Sweep {
    let (stripped, holes) = strip_boxes(sweep, boxes);
    if holes.is_empty() {
        return stripped;
    }
    let fill = raycast_rays(background, sweep.pose, sweep.n_rays, max_range, holes.iter().copied());
    fill_holes(&stripped, &holes, &fill)
}

/// Like [`remove_actors`], with the background already rendered from the
/// sweep pose.
pub fn remove_actors_with_fill(sweep: &Sweep, boxes: &[OrientedBox], fill: &RangeImage) -> Result<Sweep> {
    if fill.n_rays() != sweep.n_rays || fill.pose != sweep.pose {
        return Err(Error::RangeImageMismatch("background image does not match sweep".into()));
    }
    let (stripped, holes) = strip_boxes(sweep, boxes);
    Ok(fill_holes(&stripped, &holes, fill))
}

/// Inserts `actors` by min-merging their render into the sweep, which also
/// drops whatever they now shadow.
pub fn add_actors(sweep: &Sweep, actors: &SceneGeometry, max_range: f64) -> Sweep {
    let base = sweep.to_range_image();
    let inserted = raycast(actors, sweep.pose, sweep.n_rays, max_range);
    let merged = merge_min(&base, &inserted).expect("images share pose and ray count");
    let n = sweep.n_rays;
    let changed: Vec<bool> = (0..n).map(|i| merged.ranges[i] < base.ranges[i]).collect();
    let mut points: Vec<_> = sweep
        .points
        .iter()
        .filter(|p| !changed[ray_bin(p.y.atan2(p.x), n)])
        .copied()
        .collect();
    points.extend((0..n).filter(|&i| changed[i]).map(|i| ray_point(i, n, merged.ranges[i], merged.tags[i])));
    Sweep { points, ..sweep.clone() }
}

/// Drops each point independently with probability `p`.
pub fn apply_dropout(sweep: &Sweep, p: f64, rng: &mut impl Rng) -> Sweep {
    let points = sweep.points.iter().filter(|_| !rng.random_bool(p.clamp(0.0, 1.0))).copied().collect();
    Sweep {
        points,
        ..sweep.clone()
    }
}

/// Per-scenario sensor simulator. Original sweeps are rendered once; the
/// background used to fill removed actors is cached per set of perturbed
/// actor ids.
pub struct SensorSimulator<'a> {
    scenario: &'a Scenario,
    lidar: LidarConfig,
    originals: Vec<Sweep>,
    backgrounds: Mutex<HashMap<Vec<u32>, Arc<Vec<RangeImage>>>>,
}

impl<'a> SensorSimulator<'a> {
    pub fn new(scenario: &'a Scenario, lidar: LidarConfig) -> Self {
        let originals = (0..scenario.n_history)
            .map(|t| Sweep::from_range_image(&super::render_frame(scenario, t, &lidar), t))
            .collect();
        Self {
            scenario,
            lidar,
            originals,
            backgrounds: Mutex::new(HashMap::new()),
        }
    }

    pub fn lidar(&self) -> &LidarConfig {
        &self.lidar
    }

    /// Unedited sweeps of the original scene.
    pub fn original_sweeps(&self) -> &[Sweep] {
        &self.originals
    }

    fn background(&self, ids: Vec<u32>) -> Arc<Vec<RangeImage>> {
        let mut cache = self.backgrounds.lock().expect("background cache poisoned");
        cache
            .entry(ids)
            .or_insert_with_key(|ids| {
                let imgs = (0..self.scenario.n_history)
                    .map(|t| {
                        let g = SceneGeometry::from_scenario(self.scenario, t, |id| !ids.contains(&id));
                        raycast(&g, self.scenario.sdv_expert.pose(t), self.lidar.n_rays, self.lidar.max_range)
                    })
                    .collect();
                Arc::new(imgs)
            })
            .clone()
    }

    /// Observation sweeps with the listed actors moved onto new trajectories.
    pub fn simulate(&self, perturbed: &BTreeMap<u32, Trajectory>) -> Result<Vec<Sweep>> {
        let n_history = self.scenario.n_history;
        let mut moved = Vec::with_capacity(perturbed.len());
        for (&id, traj) in perturbed {
            let actor = self.scenario.actor(id)?;
            if traj.len() < n_history {
                return Err(Error::Validation(format!(
                    "perturbed trajectory for actor {id} has {} states, need at least {n_history}",
                    traj.len()
                )));
            }
            moved.push((actor, traj));
        }
        let background = self.background(perturbed.keys().copied().collect());
        (0..n_history)
            .map(|t| {
                let boxes: Vec<_> = moved.iter().map(|(a, _)| a.box_at(t)).collect();
                let removed = remove_actors_with_fill(&self.originals[t], &boxes, &background[t])?;
                let mut inserted = SceneGeometry::default();
                for (a, traj) in &moved {
                    inserted.push(Tag::Actor(a.id), a.footprint.at(traj.pose(t)).to_polygon());
                }
                Ok(add_actors(&removed, &inserted, self.lidar.max_range))
            })
            .collect()
    }
}

/// One-shot convenience wrapper around [`SensorSimulator`].
pub fn simulate(scenario: &Scenario, perturbed: &BTreeMap<u32, Trajectory>, lidar: &LidarConfig) -> Result<Vec<Sweep>> {
    SensorSimulator::new(scenario, *lidar).simulate(perturbed)
}
