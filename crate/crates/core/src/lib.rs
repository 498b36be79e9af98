//! Adversarial scenario generation for planners under test.
//!
//! The crate perturbs actor behaviors in synthetic driving scenarios under
//! kinematic-feasibility constraints, regenerates planar LiDAR sweeps to
//! match the perturbed world, and runs budget-limited black-box search for
//! perturbations that make a planner collide, deviate or drive
//! uncomfortably.
//!
//! Module map:
//! - [`scenario`]: domain types, file format, geometry, seeded randomness
//! - [`kinematics`]: bicycle-model rollout and the normalized perturbation
//! - [`feasibility`]: plausible trajectory sets, projection, actor selection
//! - [`sensorsim`]: raycasting and range-image sweep editing
//! - [`autonomy`]: planner interface and the two reference stacks
//! - [`adversary`]: adversarial objective, search algorithms, the attack loop
//! - [`eval`]: metrics, curation, benchmarks, transfer, plots
//! - [`toy`]: built-in toy scenes used by tests, examples and the CLI

pub mod adversary;
pub mod autonomy;
pub mod error;
pub mod eval;
pub mod feasibility;
pub mod kinematics;
pub mod scenario;
pub mod sensorsim;
pub mod toy;

pub use error::{Error, Result};
