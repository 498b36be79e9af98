use super::{clip, Evaluator};
use crate::error::Result;
use crate::scenario::rng::RandomSource;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Genetic search with elitism, fitness-proportional parent sampling and
/// mutation rate/range that decay with the number of plateaus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub max_plateaus: usize,
    /// Mutation magnitude before any plateau.
    pub initial_mutation_range: f64,
    pub min_mutation_range: f64,
    pub initial_mutation_prob: f64,
    pub min_mutation_prob: f64,
    pub gamma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 32,
            generations: 50,
            max_plateaus: 25,
            initial_mutation_range: 1.0,
            min_mutation_range: 0.3,
            initial_mutation_prob: 0.5,
            min_mutation_prob: 0.1,
            gamma: 0.9,
        }
    }
}

impl GaParams {
    /// Mutation probability and range after `g` plateaus.
    pub fn schedule(&self, g: usize) -> (f64, f64) {
        let decay = self.gamma.powi(g as i32);
        (
            (self.initial_mutation_prob * decay).max(self.min_mutation_prob),
            (self.initial_mutation_range * decay).max(self.min_mutation_range),
        )
    }
}

fn mutate(x: &mut [f64], prob: f64, range: f64, r: &mut impl Rng) {
    for v in x.iter_mut() {
        if r.random_bool(prob) {
            *v += r.random_range(-range..=range);
        }
    }
    clip(x);
}

/// Index drawn with probability proportional to shifted fitness.
fn sample(weights: &[f64], total: f64, r: &mut impl Rng) -> usize {
    if total <= 0.0 {
        return r.random_range(0..weights.len());
    }
    let mut t = r.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            return i;
        }
        t -= w;
    }
    weights.len() - 1
}

pub(super) fn run<T: Send, F>(ev: &mut Evaluator<'_, T, F>, dim: usize, p: &GaParams, rng: &RandomSource)
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    let mut r = rng.rng();
    let (prob0, range0) = p.schedule(0);
    let mut pop: Vec<Vec<f64>> = (0..p.population)
        .map(|k| {
            let mut x = vec![0.0; dim];
            if k > 0 {
                mutate(&mut x, prob0, range0, &mut r);
            }
            x
        })
        .collect();
    let mut plateaus = 0;
    let mut best_ever = f64::NEG_INFINITY;
    for _ in 0..p.generations {
        let fit = ev.eval_batch(pop.clone());
        if fit.len() < pop.len() {
            return;
        }
        let elite = (0..fit.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
        if fit[elite] > best_ever {
            best_ever = fit[elite];
        } else {
            plateaus += 1;
            if plateaus >= p.max_plateaus {
                return;
            }
        }
        let (prob, range) = p.schedule(plateaus);
        let lo = fit.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = fit.iter().map(|f| f - lo).collect();
        let total: f64 = weights.iter().sum();
        let mut next = Vec::with_capacity(p.population);
        next.push(pop[elite].clone());
        while next.len() < p.population {
            let (a, b) = (sample(&weights, total, &mut r), sample(&weights, total, &mut r));
            let (wa, wb) = (weights[a], weights[b]);
            let pa = if wa + wb > 0.0 { wa / (wa + wb) } else { 0.5 };
            let mut child: Vec<f64> = (0..dim)
                .map(|i| if r.random_bool(pa) { pop[a][i] } else { pop[b][i] })
                .collect();
            mutate(&mut child, prob, range, &mut r);
            next.push(child);
        }
        pop = next;
    }
}
