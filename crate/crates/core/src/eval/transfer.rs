//! Transferability: scenarios found by attacking one stack, replayed against
//! every other stack.

use super::metrics::{score, MetricsRow};
use super::table::{f3, Table};
use crate::adversary::{attack, run_planner, AttackConfig};
use crate::autonomy::StackKind;
use crate::error::Result;
use crate::scenario::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub scenario: String,
    pub source: StackKind,
    pub target: StackKind,
    pub metrics: MetricsRow,
}

/// `collision_5s[i][j]`: rate at which scenarios generated against
/// `stacks[i]` make `stacks[j]` collide within 5 s. Same for `l2_5s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub stacks: Vec<StackKind>,
    pub collision_5s: Vec<Vec<f64>>,
    pub l2_5s: Vec<Vec<f64>>,
    pub rows: Vec<TransferRow>,
}

impl TransferMatrix {
    /// Whether each diagonal entry is at least every other entry in its row.
    pub fn diagonal_dominates(&self) -> bool {
        self.collision_5s
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|&v| row[i] >= v))
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["source".to_string()];
        for t in &self.stacks {
            header.push(format!("{t}_col5"));
        }
        for t in &self.stacks {
            header.push(format!("{t}_l2_5"));
        }
        let mut table = Table {
            title: "transfer (rows: attacked stack, columns: evaluated stack)".into(),
            header,
            rows: Vec::new(),
        };
        if self.rows.is_empty() {
            return table;
        }
        for (i, s) in self.stacks.iter().enumerate() {
            let mut row = vec![s.to_string()];
            row.extend(self.collision_5s[i].iter().map(|&v| f3(v)));
            row.extend(self.l2_5s[i].iter().map(|&v| f3(v)));
            table.push(row);
        }
        table
    }
}

/// Attacks each scenario once per source stack with `base` (its `stack`
/// field is overridden), then scores every target stack on the generated
/// scenario. Diagonal entries reuse the attack's own winning plan.
pub fn transfer(scenarios: &[(String, Scenario)], stacks: &[StackKind], base: &AttackConfig) -> Result<TransferMatrix> {
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..stacks.len()).map(move |k| (s, k)))
        .collect();
    let per_job: Vec<Vec<TransferRow>> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let (name, scenario) = &scenarios[s];
            let source = stacks[k];
            let config = AttackConfig {
                stack: source,
                ..base.clone()
            };
            let out = attack(scenario, &config)?;
            let perturbed = out.perturbed();
            stacks
                .iter()
                .map(|&target| {
                    let metrics = if target == source {
                        score(name, &out.plan.trajectory, &out.scenario)?
                    } else {
                        let (world, _, plan) = run_planner(scenario, &perturbed, &target, &config)?;
                        score(name, &plan.trajectory, &world)?
                    };
                    Ok(TransferRow {
                        scenario: name.clone(),
                        source,
                        target,
                        metrics,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<TransferRow> = per_job.into_iter().flatten().collect();

    let n = stacks.len();
    let mut collision_5s = vec![vec![0.0; n]; n];
    let mut l2_5s = vec![vec![0.0; n]; n];
    let count = scenarios.len().max(1) as f64;
    for r in &rows {
        let i = stacks.iter().position(|&s| s == r.source).expect("source is configured");
        let j = stacks.iter().position(|&s| s == r.target).expect("target is configured");
        collision_5s[i][j] += r.metrics.collision_5s as u8 as f64 / count;
        l2_5s[i][j] += r.metrics.l2_5s / count;
    }
    Ok(TransferMatrix {
        stacks: stacks.to_vec(),
        collision_5s,
        l2_5s,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::optim::Algorithm;
    use crate::toy;

    #[test]
    fn matrix_is_square_and_diagonal_is_self_attack() {
        let scenes = vec![("bus".to_string(), toy::occluding_bus())];
        let base = AttackConfig {
            algorithm: Algorithm::Rs,
            budget: Some(6),
            n_sample: 1500,
            ..AttackConfig::default()
        };
        let m = transfer(&scenes, &StackKind::ALL, &base).unwrap();
        assert_eq!(m.collision_5s.len(), 2);
        assert!(m.collision_5s.iter().all(|r| r.len() == 2));
        assert_eq!(m.rows.len(), 4);
        // The sensor stack cannot see the hidden car, so its self-attack
        // collides; the ground-truth stack never does on this scene.
        assert_eq!(m.collision_5s[1][1], 1.0);
        assert_eq!(m.collision_5s[0][0], 0.0);
        let diag = m
            .rows
            .iter()
            .find(|r| r.source == StackKind::Sensor && r.target == StackKind::Sensor)
            .unwrap();
        let direct = attack(&scenes[0].1, &AttackConfig { stack: StackKind::Sensor, ..base }).unwrap();
        assert_eq!(diag.metrics, score("bus", &direct.plan.trajectory, &direct.scenario).unwrap());
        assert_eq!(m.table().rows.len(), 2);
    }
}
