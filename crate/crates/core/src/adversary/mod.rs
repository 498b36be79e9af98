//! Adversarial objective, black-box search, and the end-to-end attack loop.
pub mod attack;
pub mod loss;
pub mod optim;
pub use attack::{attack, attack_planner, run_planner, evaluate_reduced, expand_reduced, grid_oracle, GridOracle, REDUCED_DIM, AttackConfig, AttackOutcome, AttackQuery, AttackRecord};
pub use loss::{adversarial_loss, LossBreakdown, ObjectiveMask};
pub use optim::{optimize, optimize_fn, Algorithm, OptimizerParams, SearchRecord};
