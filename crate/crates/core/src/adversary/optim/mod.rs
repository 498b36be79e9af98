//! Budgeted black-box maximizers over the box [-1, 1]^dim.
//!
//! Every algorithm starts by querying the zero vector, proposes only
//! in-box points, and stops as soon as the query budget is spent. A failed
//! objective evaluation ends the search; the queries made so far are kept.

mod bandit;
mod bo;
mod ga;
mod nes;
mod rs;

pub use bandit::BanditParams;
pub use bo::BoParams;
pub use ga::GaParams;
pub use nes::NesParams;
pub use rs::RsParams;

use crate::error::{Error, Result};
use crate::scenario::rng::RandomSource;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bo,
    Ga,
    Rs,
    Nes,
    BanditTd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Bo, Algorithm::Ga, Algorithm::Rs, Algorithm::Nes, Algorithm::BanditTd];

    /// Query budget each algorithm is usually run with.
    pub fn default_budget(self) -> usize {
        match self {
            Algorithm::Bo => 75,
            Algorithm::Ga => 1600,
            Algorithm::Rs => 100,
            Algorithm::Nes => 400,
            Algorithm::BanditTd => 100,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bo => "bo",
            Algorithm::Ga => "ga",
            Algorithm::Rs => "rs",
            Algorithm::Nes => "nes",
            Algorithm::BanditTd => "bandit_td",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bo" => Ok(Algorithm::Bo),
            "ga" => Ok(Algorithm::Ga),
            "rs" => Ok(Algorithm::Rs),
            "nes" => Ok(Algorithm::Nes),
            "bandit_td" | "bandit" | "bandittd" => Ok(Algorithm::BanditTd),
            _ => Err(Error::Config(format!("unknown algorithm {s:?} (expected bo, ga, rs, nes, bandit_td)"))),
        }
    }
}

/// Hyperparameters for every algorithm; only the selected one is used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerParams {
    pub bo: BoParams,
    pub ga: GaParams,
    pub rs: RsParams,
    pub nes: NesParams,
    pub bandit: BanditParams,
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("bo.beta", self.bo.beta)?;
        positive("ga.gamma", self.ga.gamma)?;
        positive("ga.initial_mutation_range", self.ga.initial_mutation_range)?;
        positive("ga.initial_mutation_prob", self.ga.initial_mutation_prob)?;
        positive("rs.epsilon", self.rs.epsilon)?;
        positive("nes.learning_rate", self.nes.learning_rate)?;
        positive("nes.fd_probe", self.nes.fd_probe)?;
        positive("bandit.prior_lr", self.bandit.prior_lr)?;
        positive("bandit.perturbation_lr", self.bandit.perturbation_lr)?;
        positive("bandit.fd_probe", self.bandit.fd_probe)?;
        positive("bandit.exploration", self.bandit.exploration)?;
        if self.ga.population < 2 || self.nes.samples_per_step == 0 || self.bo.n_init == 0 {
            return Err(Error::Config("population, sample and init counts must be positive".into()));
        }
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query<T> {
    pub delta: Vec<f64>,
    pub value: f64,
    pub info: T,
    /// Wall-clock seconds spent in the objective.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord<T> {
    pub queries: Vec<Query<T>>,
    /// Message of the objective error that ended the search, if any.
    pub error: Option<String>,
}

impl<T> SearchRecord<T> {
    /// Index of the first query attaining the maximum value.
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, q) in self.queries.iter().enumerate() {
            if best.is_none_or(|b| q.value > self.queries[b].value) {
                best = Some(i);
            }
        }
        best
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best().map(|i| self.queries[i].value)
    }

    /// Running maximum of the query values.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut m = f64::NEG_INFINITY;
        self.queries
            .iter()
            .map(|q| {
                m = m.max(q.value);
                m
            })
            .collect()
    }

    /// Deltas and values only, for comparing runs bit-for-bit.
    pub fn trace(&self) -> Vec<(Vec<u64>, u64)> {
        self.queries
            .iter()
            .map(|q| (q.delta.iter().map(|x| x.to_bits()).collect(), q.value.to_bits()))
            .collect()
    }
}

pub fn clip(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(-1.0, 1.0);
    }
}

/// Budget accounting shared by all algorithms.
pub(crate) struct Evaluator<'f, T, F> {
    f: &'f F,
    budget: usize,
    record: SearchRecord<T>,
}

impl<'f, T: Send, F> Evaluator<'f, T, F>
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    fn new(f: &'f F, budget: usize) -> Self {
        Self {
            f,
            budget,
            record: SearchRecord { queries: Vec::new(), error: None },
        }
    }

    pub(crate) fn remaining(&self) -> usize {
        if self.record.error.is_some() {
            0
        } else {
            self.budget - self.record.queries.len()
        }
    }

    pub(crate) fn done(&self) -> bool {
        self.remaining() == 0
    }

    fn run_one(f: &F, delta: &[f64]) -> (Result<(f64, T)>, f64) {
        assert!(
            delta.iter().all(|x| (-1.0..=1.0).contains(x)),
            "optimizer proposed a point outside the unit box"
        );
        let t = Instant::now();
        let r = f(delta);
        (r, t.elapsed().as_secs_f64())
    }

    fn push(&mut self, delta: Vec<f64>, outcome: (Result<(f64, T)>, f64)) -> Option<f64> {
        match outcome.0 {
            Ok((value, info)) => {
                self.record.queries.push(Query { delta, value, info, seconds: outcome.1 });
                Some(value)
            }
            Err(e) => {
                let n = self.record.queries.len();
                self.record.error = Some(Error::Objective { query: n, message: e.to_string() }.to_string());
                None
            }
        }
    }

    /// Evaluates one point; `None` once the budget is spent or after an error.
    pub(crate) fn eval(&mut self, delta: Vec<f64>) -> Option<f64> {
        if self.done() {
            return None;
        }
        let out = Self::run_one(self.f, &delta);
        self.push(delta, out)
    }

    /// Evaluates a batch concurrently, truncated to the remaining budget.
    /// Results are recorded in batch order; an error drops everything after it.
    pub(crate) fn eval_batch(&mut self, deltas: Vec<Vec<f64>>) -> Vec<f64> {
        let take = deltas.len().min(self.remaining());
        let deltas: Vec<_> = deltas.into_iter().take(take).collect();
        let f = self.f;
        let outs: Vec<_> = deltas.par_iter().map(|d| Self::run_one(f, d)).collect();
        let mut values = Vec::with_capacity(take);
        for (d, out) in deltas.into_iter().zip(outs) {
            match self.push(d, out) {
                Some(v) => values.push(v),
                None => break,
            }
        }
        values
    }

    fn finish(self) -> SearchRecord<T> {
        self.record
    }
}

/// Maximizes `f` over [-1, 1]^dim with at most `budget` evaluations.
pub fn optimize<T, F>(
    f: &F,
    dim: usize,
    algorithm: Algorithm,
    budget: usize,
    params: &OptimizerParams,
    rng: &RandomSource,
) -> Result<SearchRecord<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    if dim == 0 {
        return Err(Error::Config("search dimension must be at least 1".into()));
    }
    params.validate()?;
    let mut ev = Evaluator::new(f, budget);
    let stream = rng.split(&format!("optimizer-{algorithm}"));
    match algorithm {
        Algorithm::Bo => bo::run(&mut ev, dim, &params.bo, &stream),
        Algorithm::Ga => ga::run(&mut ev, dim, &params.ga, &stream),
        Algorithm::Rs => rs::run(&mut ev, dim, &params.rs, &stream),
        Algorithm::Nes => nes::run(&mut ev, dim, &params.nes, &stream),
        Algorithm::BanditTd => bandit::run(&mut ev, dim, &params.bandit, &stream),
    }
    Ok(ev.finish())
}

/// [`optimize`] for a plain infallible scalar function.
pub fn optimize_fn(
    f: impl Fn(&[f64]) -> f64 + Sync,
    dim: usize,
    algorithm: Algorithm,
    budget: usize,
    params: &OptimizerParams,
    rng: &RandomSource,
) -> Result<SearchRecord<()>> {
    let g = |x: &[f64]| Ok((f(x), ()));
    optimize(&g, dim, algorithm, budget, params, rng)
}
