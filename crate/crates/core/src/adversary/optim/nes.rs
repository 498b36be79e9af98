use super::{clip, Evaluator};
use crate::error::Result;
use crate::scenario::rng::RandomSource;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Antithetic natural-evolution-strategies gradient estimate with signed
/// projected ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NesParams {
    /// Antithetic pairs per step.
    pub samples_per_step: usize,
    pub learning_rate: f64,
    pub fd_probe: f64,
    pub iterations: usize,
}

impl Default for NesParams {
    fn default() -> Self {
        Self {
            samples_per_step: 10,
            learning_rate: 0.25,
            fd_probe: 0.5,
            iterations: 20,
        }
    }
}

pub(super) fn run<T: Send, F>(ev: &mut Evaluator<'_, T, F>, dim: usize, p: &NesParams, rng: &RandomSource)
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    let mut r = rng.rng();
    let mut x = vec![0.0; dim];
    for _ in 0..p.iterations {
        if ev.eval(x.clone()).is_none() {
            return;
        }
        let noise: Vec<Vec<f64>> = (0..p.samples_per_step)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        let mut probes = Vec::with_capacity(2 * noise.len());
        for u in &noise {
            for sign in [1.0, -1.0] {
                let mut y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + sign * p.fd_probe * b).collect();
                clip(&mut y);
                probes.push(y);
            }
        }
        let values = ev.eval_batch(probes);
        if values.len() < 2 * noise.len() {
            return;
        }
        let mut g = vec![0.0; dim];
        for (k, u) in noise.iter().enumerate() {
            let diff = values[2 * k] - values[2 * k + 1];
            for (gi, ui) in g.iter_mut().zip(u) {
                *gi += diff * ui;
            }
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            if *gi != 0.0 {
                *xi += p.learning_rate * gi.signum();
            }
        }
        clip(&mut x);
    }
}
