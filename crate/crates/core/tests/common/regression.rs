//! Committed-seed directional baselines: BO vs RS collision rate at a matched
//! budget, and the stack transfer matrix, both on the toy suite. Shared by the
//! acceptance target and the generator example.

use advscen::adversary::{AttackConfig, Algorithm};
use advscen::autonomy::StackKind;
use advscen::eval::{benchmark, transfer};
use serde::{Deserialize, Serialize};

pub const SEEDS: [u64; 3] = [0, 1, 2];
pub const BUDGET: usize = 75;
pub const PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/regression_baseline.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub seeds: Vec<u64>,
    pub budget: usize,
    /// Mean adversarial collision@5s over seeds x scenes.
    pub bo_collision_5s: f64,
    pub rs_collision_5s: f64,
    pub stacks: Vec<StackKind>,
    /// Transfer matrices averaged over seeds.
    pub transfer_collision_5s: Vec<Vec<f64>>,
    pub transfer_l2_5s: Vec<Vec<f64>>,
}

pub fn compute() -> advscen::Result<Baseline> {
    let scenes: Vec<_> = advscen::toy::suite().into_iter().map(|(n, s)| (n.to_string(), s)).collect();
    let n = StackKind::ALL.len();
    let mut out = Baseline {
        seeds: SEEDS.to_vec(),
        budget: BUDGET,
        bo_collision_5s: 0.0,
        rs_collision_5s: 0.0,
        stacks: StackKind::ALL.to_vec(),
        transfer_collision_5s: vec![vec![0.0; n]; n],
        transfer_l2_5s: vec![vec![0.0; n]; n],
    };
    let k = SEEDS.len() as f64;
    for seed in SEEDS {
        let base = AttackConfig {
            seed,
            budget: Some(BUDGET),
            ..AttackConfig::default()
        };
        let cells = benchmark::run(&scenes, &benchmark::with_algorithms(&base, &[Algorithm::Bo, Algorithm::Rs], None));
        if let Some(c) = cells.iter().find(|c| c.failed()) {
            return Err(advscen::Error::Validation(format!("{} / {}: {:?}", c.scenario, c.algorithm, c.error)));
        }
        let rate = |a: Algorithm| {
            let v: Vec<f64> = cells.iter().filter(|c| c.algorithm == a).map(|c| c.adversarial.collision_5s as u8 as f64).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        out.bo_collision_5s += rate(Algorithm::Bo) / k;
        out.rs_collision_5s += rate(Algorithm::Rs) / k;
        let m = transfer(&scenes, &StackKind::ALL, &base)?;
        for i in 0..n {
            for j in 0..n {
                out.transfer_collision_5s[i][j] += m.collision_5s[i][j] / k;
                out.transfer_l2_5s[i][j] += m.l2_5s[i][j] / k;
            }
        }
    }
    Ok(out)
}

/// Row-wise: diagonal at least every off-diagonal entry.
pub fn diagonal_dominates(m: &[Vec<f64>]) -> bool {
    m.iter().enumerate().all(|(i, row)| row.iter().all(|&v| row[i] >= v))
}
