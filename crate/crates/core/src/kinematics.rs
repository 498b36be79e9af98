//! Kinematic bicycle model: rollout under physical bounds and the
//! normalized perturbation vector that drives it.
//!
//! A perturbation is a point in `[-1, 1]^(4 + 2T)`: four initial-state
//! offsets `(dx, dy, dtheta, dv)` followed by one `(accel, curvature_rate)`
//! pair per planning step. Each component is scaled by the matching bound in
//! [`PhysicalBounds`].

use crate::error::{Error, Result};
use crate::scenario::geometry::{Pose, Vec2};
use crate::scenario::Trajectory;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Tolerance used when re-checking clamped quantities.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Number of initial-state components at the head of a perturbation vector.
pub const INITIAL_DIMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BicycleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub kappa: f64,
    pub a: f64,
}

impl BicycleState {
    pub const fn new(x: f64, y: f64, theta: f64, v: f64, kappa: f64, a: f64) -> Self {
        Self { x, y, theta, v, kappa, a }
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.theta)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn lateral_accel(&self) -> f64 {
        self.v * self.v * self.kappa
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.v, self.kappa, self.a]
            .iter()
            .all(|f| f.is_finite())
    }

    /// Applies a rigid transform to the pose part of the state.
    pub fn transformed(&self, g: &Pose) -> Self {
        let p = g.transform_point(self.position());
        Self {
            x: p.x,
            y: p.y,
            theta: self.theta + g.theta,
            ..*self
        }
    }
}

/// Physical limits of the bicycle model plus the scale of each
/// initial-state perturbation component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalBounds {
    /// |kappa| limit, 1/m.
    pub max_curvature: f64,
    /// |d kappa / dt| limit, 1/(m s).
    pub max_curvature_rate: f64,
    /// |a| limit, m/s^2.
    pub max_accel: f64,
    /// |v^2 kappa| limit, m/s^2.
    pub max_lateral_accel: f64,
    /// Speed ceiling, m/s. Speeds are also floored at zero.
    pub max_speed: f64,
    pub init_position_offset: f64,
    pub init_speed_offset: f64,
    pub init_heading_offset: f64,
}

impl Default for PhysicalBounds {
    fn default() -> Self {
        Self {
            max_curvature: 0.2,
            max_curvature_rate: 0.05,
            max_accel: 2.0,
            max_lateral_accel: 3.0,
            max_speed: 15.0,
            init_position_offset: 5.0,
            init_speed_offset: 5.0,
            init_heading_offset: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl PhysicalBounds {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let b: Self = toml::from_str(s).map_err(|e| Error::Parse {
            field: "bounds".into(),
            message: e.to_string(),
        })?;
        b.validate()?;
        Ok(b)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.max_curvature,
            self.max_curvature_rate,
            self.max_accel,
            self.max_lateral_accel,
            self.max_speed,
            self.init_position_offset,
            self.init_speed_offset,
            self.init_heading_offset,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("physical bounds must be finite and positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub accel: f64,
    pub curvature_rate: f64,
}

impl Control {
    pub const fn new(accel: f64, curvature_rate: f64) -> Self {
        Self { accel, curvature_rate }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSequence(pub Vec<Control>);

impl ControlSequence {
    pub fn zeros(steps: usize) -> Self {
        Self(vec![Control::default(); steps])
    }

    pub fn constant(steps: usize, c: Control) -> Self {
        Self(vec![c; steps])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn within(&self, bounds: &PhysicalBounds) -> bool {
        self.0.iter().all(|c| {
            c.accel.abs() <= bounds.max_accel + BOUND_TOLERANCE
                && c.curvature_rate.abs() <= bounds.max_curvature_rate + BOUND_TOLERANCE
        })
    }
}

/// Output of [`rollout`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub trajectory: Trajectory,
    /// Number of times a control or state had to be clamped to a bound.
    pub clamp_events: usize,
}

fn clamp_counted(v: f64, lo: f64, hi: f64, events: &mut usize) -> f64 {
    if v < lo {
        *events += 1;
        lo
    } else if v > hi {
        *events += 1;
        hi
    } else {
        v
    }
}

/// Clamps a single state to the per-state invariants. Curvature is reduced
/// (not speed) when the lateral-acceleration bound is exceeded.
pub fn clamp_state(s: &BicycleState, bounds: &PhysicalBounds) -> (BicycleState, usize) {
    let mut events = 0;
    let v = clamp_counted(s.v, 0.0, bounds.max_speed, &mut events);
    let mut kappa = clamp_counted(s.kappa, -bounds.max_curvature, bounds.max_curvature, &mut events);
    if v * v * kappa.abs() > bounds.max_lateral_accel {
        kappa = kappa.signum() * bounds.max_lateral_accel / (v * v);
        events += 1;
    }
    let a = clamp_counted(s.a, -bounds.max_accel, bounds.max_accel, &mut events);
    (BicycleState { v, kappa, a, ..*s }, events)
}

/// One forward-Euler step from a state already within bounds. `events` is
/// incremented once per clamp applied.
pub fn step(s: &BicycleState, c: &Control, dt: f64, bounds: &PhysicalBounds, events: &mut usize) -> BicycleState {
    let rate_step = bounds.max_curvature_rate * dt;
    let accel = clamp_counted(c.accel, -bounds.max_accel, bounds.max_accel, events);
    let kappa_dot = clamp_counted(
        c.curvature_rate,
        -bounds.max_curvature_rate,
        bounds.max_curvature_rate,
        events,
    );

    let (sin, cos) = s.theta.sin_cos();
    let x = s.x + s.v * cos * dt;
    let y = s.y + s.v * sin * dt;
    let theta = s.theta + s.v * s.kappa * dt;

    let mut v = clamp_counted(s.v + accel * dt, 0.0, bounds.max_speed, events);
    let mut kappa = clamp_counted(
        s.kappa + kappa_dot * dt,
        -bounds.max_curvature,
        bounds.max_curvature,
        events,
    );

    if v * v * kappa.abs() > bounds.max_lateral_accel {
        *events += 1;
        // Curvature reachable this step under the rate limit, intersected
        // with the lateral-acceleration cap at the new speed.
        let cap = bounds.max_lateral_accel / (v * v);
        let lo = (s.kappa - rate_step).max(-cap);
        let hi = (s.kappa + rate_step).min(cap);
        if lo <= hi {
            kappa = kappa.clamp(lo, hi);
        } else {
            // Curvature cannot shrink fast enough: hold speed down instead.
            // The previous state satisfied the cap, so this never decelerates.
            kappa = s.kappa.signum() * (s.kappa.abs() - rate_step);
            v = (bounds.max_lateral_accel / kappa.abs()).sqrt().min(v);
        }
    }

    BicycleState {
        x,
        y,
        theta,
        v,
        kappa,
        a: (v - s.v) / dt,
    }
}

/// Forward-Euler bicycle rollout. Heading and position advance with the
/// pre-update speed, curvature and heading. Returns `controls.len() + 1`
/// states starting at the (clamped) initial state.
pub fn rollout(
    s0: &BicycleState,
    controls: &ControlSequence,
    dt: f64,
    bounds: &PhysicalBounds,
) -> Result<Rollout> {
    if !s0.is_finite() {
        return Err(Error::NonFinite(format!("initial state {s0:?}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite(format!("dt = {dt}")));
    }
    if let Some(c) = controls
        .0
        .iter()
        .find(|c| !(c.accel.is_finite() && c.curvature_rate.is_finite()))
    {
        return Err(Error::NonFinite(format!("control {c:?}")));
    }

    let (first, mut events) = clamp_state(s0, bounds);
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(first);
    let mut s = first;
    for c in &controls.0 {
        s = step(&s, c, dt, bounds, &mut events);
        states.push(s);
    }

    Ok(Rollout {
        trajectory: Trajectory::new(states),
        clamp_events: events,
    })
}

/// Initial-state offsets plus controls: a perturbation in physical units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcretePerturbation {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub dv: f64,
    pub controls: ControlSequence,
}

impl ConcretePerturbation {
    /// Perturbed initial state, clamped to the state invariants.
    pub fn initial_state(&self, base: &BicycleState, bounds: &PhysicalBounds) -> BicycleState {
        let raw = BicycleState {
            x: base.x + self.dx,
            y: base.y + self.dy,
            theta: base.theta + self.dtheta,
            v: base.v + self.dv,
            ..*base
        };
        clamp_state(&raw, bounds).0
    }

    /// Normalizes back into `[-1, 1]^dim`.
    pub fn encode(&self, bounds: &PhysicalBounds) -> Perturbation {
        let mut delta = Vec::with_capacity(INITIAL_DIMS + 2 * self.controls.len());
        delta.push(self.dx / bounds.init_position_offset);
        delta.push(self.dy / bounds.init_position_offset);
        delta.push(self.dtheta / bounds.init_heading_offset);
        delta.push(self.dv / bounds.init_speed_offset);
        for c in &self.controls.0 {
            delta.push(c.accel / bounds.max_accel);
            delta.push(c.curvature_rate / bounds.max_curvature_rate);
        }
        Perturbation::new(delta)
    }
}

/// Normalized search vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    pub delta: Vec<f64>,
}

impl Perturbation {
    pub fn new(delta: Vec<f64>) -> Self {
        Self { delta }
    }

    pub fn zeros(steps: usize) -> Self {
        Self::new(vec![0.0; dim_for_steps(steps)])
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    pub fn in_unit_ball(&self) -> bool {
        self.delta.iter().all(|c| c.abs() <= 1.0 + 1e-12)
    }

    /// Affine de-normalization into physical units.
    pub fn to_concrete(&self, steps: usize, bounds: &PhysicalBounds) -> Result<ConcretePerturbation> {
        let expected = dim_for_steps(steps);
        if self.delta.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.delta.len(),
            });
        }
        if let Some(c) = self.delta.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("perturbation component {c}")));
        }
        if !self.in_unit_ball() {
            return Err(Error::Validation("perturbation outside [-1, 1]".into()));
        }
        let d = &self.delta;
        let controls = d[INITIAL_DIMS..]
            .chunks_exact(2)
            .map(|p| Control::new(p[0] * bounds.max_accel, p[1] * bounds.max_curvature_rate))
            .collect();
        Ok(ConcretePerturbation {
            dx: d[0] * bounds.init_position_offset,
            dy: d[1] * bounds.init_position_offset,
            dtheta: d[2] * bounds.init_heading_offset,
            dv: d[3] * bounds.init_speed_offset,
            controls: ControlSequence(controls),
        })
    }
}

pub const fn dim_for_steps(steps: usize) -> usize {
    INITIAL_DIMS + 2 * steps
}

/// De-normalizes `delta` against `base`: perturbed initial state plus controls.
pub fn decode(
    delta: &Perturbation,
    base: &BicycleState,
    steps: usize,
    bounds: &PhysicalBounds,
) -> Result<(BicycleState, ControlSequence)> {
    let concrete = delta.to_concrete(steps, bounds)?;
    Ok((concrete.initial_state(base, bounds), concrete.controls))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundField {
    Curvature,
    Accel,
    Speed,
    LateralAccel,
    CurvatureRate,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    pub index: usize,
    pub field: BoundField,
    pub value: f64,
}

/// First bound violation in `traj`, or `None` when every state and every
/// consecutive curvature change is within limits.
pub fn check_bounds(traj: &Trajectory, dt: f64, bounds: &PhysicalBounds) -> Option<BoundViolation> {
    let tol = BOUND_TOLERANCE;
    for (i, s) in traj.states.iter().enumerate() {
        let fail = |field, value| Some(BoundViolation { index: i, field, value });
        if !s.is_finite() {
            return fail(BoundField::NonFinite, f64::NAN);
        }
        if s.kappa.abs() > bounds.max_curvature + tol {
            return fail(BoundField::Curvature, s.kappa);
        }
        if s.a.abs() > bounds.max_accel + tol {
            return fail(BoundField::Accel, s.a);
        }
        if s.v < -tol || s.v > bounds.max_speed + tol {
            return fail(BoundField::Speed, s.v);
        }
        if s.lateral_accel().abs() > bounds.max_lateral_accel + tol {
            return fail(BoundField::LateralAccel, s.lateral_accel());
        }
        if i > 0 {
            let rate = (s.kappa - traj.states[i - 1].kappa).abs() / dt;
            if rate > bounds.max_curvature_rate + tol {
                return fail(BoundField::CurvatureRate, rate);
            }
        }
    }
    None
}

/// Second finite difference of speed at interior states: longitudinal jerk.
pub fn speed_jerk(states: &[BicycleState], dt: f64) -> Vec<f64> {
    states
        .windows(3)
        .map(|w| (w[2].v - 2.0 * w[1].v + w[0].v) / (dt * dt))
        .collect()
}
