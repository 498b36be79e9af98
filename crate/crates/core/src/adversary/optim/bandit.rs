use super::{clip, Evaluator};
use crate::error::Result;
use crate::scenario::rng::RandomSource;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Bandit gradient estimation with a time-dependent prior, l-infinity
/// variant: the prior is updated by an exponentiated-gradient step and the
/// iterate moves along its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BanditParams {
    pub prior_lr: f64,
    pub perturbation_lr: f64,
    pub fd_probe: f64,
    pub exploration: f64,
}

impl Default for BanditParams {
    fn default() -> Self {
        Self {
            prior_lr: 1.0,
            perturbation_lr: 0.25,
            fd_probe: 0.5,
            exploration: 1.0,
        }
    }
}

/// Exponentiated-gradient ascent step for a vector living in [-1, 1].
fn eg_step(prior: &mut [f64], grad: &[f64], lr: f64) {
    for (x, g) in prior.iter_mut().zip(grad) {
        let real = (*x + 1.0) / 2.0;
        let pos = real * (lr * g).exp();
        let neg = (1.0 - real) * (-lr * g).exp();
        let new = if pos + neg > 0.0 && (pos + neg).is_finite() { pos / (pos + neg) } else { real };
        *x = 2.0 * new - 1.0;
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(super) fn run<T: Send, F>(ev: &mut Evaluator<'_, T, F>, dim: usize, p: &BanditParams, rng: &RandomSource)
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    let mut r = rng.rng();
    let mut x = vec![0.0; dim];
    let mut prior = vec![0.0; dim];
    // Only the two probes are charged per round; the iterate itself is
    // evaluated once at the start and whenever a single query is left over.
    if ev.eval(x.clone()).is_none() {
        return;
    }
    loop {
        if ev.remaining() == 1 {
            ev.eval(x.clone());
            return;
        }
        let scale = 1.0 / (dim as f64).sqrt();
        let u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).map(|z: f64| z * scale).collect();
        let probe = |sign: f64| {
            let q: Vec<f64> = prior.iter().zip(&u).map(|(a, b)| a + sign * p.exploration * b).collect();
            let n = l2(&q).max(1e-12);
            let mut y: Vec<f64> = x.iter().zip(&q).map(|(a, b)| a + p.fd_probe * b / n).collect();
            clip(&mut y);
            y
        };
        let values = ev.eval_batch(vec![probe(1.0), probe(-1.0)]);
        if values.len() < 2 {
            return;
        }
        let deriv = (values[0] - values[1]) / (p.fd_probe * p.exploration);
        let grad: Vec<f64> = u.iter().map(|ui| deriv * ui).collect();
        eg_step(&mut prior, &grad, p.prior_lr);
        for (xi, pi) in x.iter_mut().zip(&prior) {
            if *pi != 0.0 {
                *xi += p.perturbation_lr * pi.signum();
            }
        }
        clip(&mut x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eg_step_stays_in_box_and_follows_gradient() {
        let mut p = vec![0.0, 0.5, -0.9];
        eg_step(&mut p, &[1.0, -2.0, 1e6], 1.0);
        assert!(p[0] > 0.0 && p[1] < 0.5);
        assert!(p.iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}
