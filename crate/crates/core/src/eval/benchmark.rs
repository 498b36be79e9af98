//! Attack benchmarks: every (scenario, config) cell runs an attack and scores
//! the planner before and after. Cells run in parallel; results come back in
//! cell order, so tables are deterministic.

use super::metrics::{score, MetricsRow, MetricsSummary};
use super::table::{f3, Table};
use crate::adversary::{attack, AttackConfig, ObjectiveMask};
use crate::adversary::optim::Algorithm;
use crate::scenario::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub stack: String,
    pub m: usize,
    pub objective: String,
    pub seed: u64,
    pub budget: usize,
    /// Queries actually spent, baseline included.
    pub queries: usize,
    pub original: MetricsRow,
    pub adversarial: MetricsRow,
    pub baseline_value: f64,
    pub best_value: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Attacks `scenario` under `config` and scores the original and the
/// worst-case plan. Errors are captured in the row.
pub fn run_cell(name: &str, scenario: &Scenario, config: &AttackConfig) -> CellResult {
    let t0 = Instant::now();
    let mut row = CellResult {
        scenario: name.to_string(),
        algorithm: config.algorithm,
        stack: config.stack.to_string(),
        m: config.m,
        objective: config.objective.to_string(),
        seed: config.seed,
        budget: config.budget(),
        queries: 0,
        original: MetricsRow::default(),
        adversarial: MetricsRow::default(),
        baseline_value: 0.0,
        best_value: 0.0,
        seconds: 0.0,
        error: None,
    };
    let result = attack(scenario, config).and_then(|out| {
        let original = score(name, &out.baseline_plan.trajectory, scenario)?;
        let adversarial = score(name, &out.plan.trajectory, &out.scenario)?;
        Ok((out.record, original, adversarial))
    });
    match result {
        Ok((record, original, adversarial)) => {
            row.queries = record.queries.len();
            row.baseline_value = record.baseline().value;
            row.best_value = record.best_query().value;
            row.original = original;
            row.adversarial = adversarial;
            row.error = record.error;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.seconds = t0.elapsed().as_secs_f64();
    row
}

/// Every scenario against every config, in (scenario, config) order.
pub fn run(scenarios: &[(String, Scenario)], configs: &[AttackConfig]) -> Vec<CellResult> {
    let cells: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..configs.len()).map(move |c| (s, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(s, c)| run_cell(&scenarios[s].0, &scenarios[s].1, &configs[c]))
        .collect()
}

pub fn with_algorithms(base: &AttackConfig, algorithms: &[Algorithm], budget: Option<usize>) -> Vec<AttackConfig> {
    algorithms
        .iter()
        .map(|&algorithm| AttackConfig {
            algorithm,
            budget: budget.or(base.budget),
            ..base.clone()
        })
        .collect()
}

pub fn with_actor_counts(base: &AttackConfig, ms: &[usize]) -> Vec<AttackConfig> {
    ms.iter().map(|&m| AttackConfig { m, ..base.clone() }).collect()
}

pub fn with_objectives(base: &AttackConfig, masks: &[ObjectiveMask]) -> Vec<AttackConfig> {
    masks
        .iter()
        .map(|&objective| AttackConfig {
            objective,
            ..base.clone()
        })
        .collect()
}

pub const RAW_HEADER: [&str; 22] = [
    "scenario", "algorithm", "stack", "m", "objective", "seed", "budget", "queries", "orig_col3", "orig_col5",
    "orig_l2_3", "orig_l2_5", "orig_jerk", "orig_lat", "adv_col3", "adv_col5", "adv_l2_3", "adv_l2_5", "adv_jerk",
    "adv_lat", "best_value", "error",
];

/// One row per cell.
pub fn raw_table(results: &[CellResult]) -> Table {
    let mut t = Table::new("cells", &RAW_HEADER);
    for r in results {
        let m = |x: &MetricsRow| {
            vec![
                (x.collision_3s as u8).to_string(),
                (x.collision_5s as u8).to_string(),
                f3(x.l2_3s),
                f3(x.l2_5s),
                f3(x.jerk),
                f3(x.lat_accel),
            ]
        };
        let mut row = vec![
            r.scenario.clone(),
            r.algorithm.to_string(),
            r.stack.clone(),
            r.m.to_string(),
            r.objective.clone(),
            r.seed.to_string(),
            r.budget.to_string(),
            r.queries.to_string(),
        ];
        row.extend(m(&r.original));
        row.extend(m(&r.adversarial));
        row.push(f3(r.best_value));
        row.push(r.error.clone().unwrap_or_default());
        t.push(row);
    }
    t
}

/// Aggregate over the successful cells of each group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: String,
    pub cells: usize,
    pub failed: usize,
    pub mean_queries: f64,
    pub original: MetricsSummary,
    pub adversarial: MetricsSummary,
}

/// Groups cells by `key` (first-appearance order) and averages the
/// successful ones.
pub fn summarize(results: &[CellResult], key: impl Fn(&CellResult) -> String) -> Vec<GroupSummary> {
    let mut keys: Vec<String> = Vec::new();
    for r in results {
        let k = key(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&CellResult> = results.iter().filter(|r| key(r) == k).collect();
            let ok: Vec<&CellResult> = group.iter().copied().filter(|r| !r.failed()).collect();
            GroupSummary {
                key: k,
                cells: group.len(),
                failed: group.len() - ok.len(),
                mean_queries: if ok.is_empty() { 0.0 } else { ok.iter().map(|r| r.queries as f64).sum::<f64>() / ok.len() as f64 },
                original: MetricsSummary::of(ok.iter().map(|r| &r.original)),
                adversarial: MetricsSummary::of(ok.iter().map(|r| &r.adversarial)),
            }
        })
        .collect()
}

pub fn summary_table(title: &str, key_name: &str, groups: &[GroupSummary]) -> Table {
    let mut t = Table::new(
        title,
        &[
            key_name, "cells", "failed", "queries", "orig_col3", "orig_col5", "adv_col3", "adv_col5", "adv_l2_3",
            "adv_l2_5", "adv_jerk", "adv_lat",
        ],
    );
    for g in groups {
        t.push(vec![
            g.key.clone(),
            g.cells.to_string(),
            g.failed.to_string(),
            format!("{:.1}", g.mean_queries),
            f3(g.original.collision_3s),
            f3(g.original.collision_5s),
            f3(g.adversarial.collision_3s),
            f3(g.adversarial.collision_5s),
            f3(g.adversarial.l2_3s),
            f3(g.adversarial.l2_5s),
            f3(g.adversarial.jerk),
            f3(g.adversarial.lat_accel),
        ]);
    }
    t
}
