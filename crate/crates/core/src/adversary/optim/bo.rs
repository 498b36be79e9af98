use super::{clip, Evaluator};
use crate::error::Result;
use crate::scenario::rng::RandomSource;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Gaussian-process surrogate with an upper-confidence-bound acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoParams {
    /// UCB exploration multiplier on the posterior standard deviation.
    pub beta: f64,
    /// Queries spent on initialization: the zero vector, then uniform draws.
    pub n_init: usize,
    /// Random acquisition candidates per step.
    pub n_candidates: usize,
    /// Candidates drawn around the incumbent per step.
    pub n_local: usize,
}

impl Default for BoParams {
    fn default() -> Self {
        Self {
            beta: 3.0,
            n_init: 20,
            n_candidates: 2000,
            n_local: 500,
        }
    }
}

const NOISE: f64 = 1e-6;
const LENGTHSCALE_GRID: [f64; 7] = [0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0];

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact GP posterior on standardized targets.
struct Gp {
    xs: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    ell2: f64,
}

impl Gp {
    fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        (-0.5 * sq_dist(a, b) / self.ell2).exp()
    }

    /// Fits with the lengthscale maximizing the marginal likelihood over a
    /// grid of multiples of the median pairwise distance.
    fn fit(xs: &[Vec<f64>], ys: &[f64]) -> Option<Gp> {
        let n = xs.len();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
        let scale = if var > 1e-24 { var.sqrt() } else { 1.0 };
        let y = DVector::from_iterator(n, ys.iter().map(|v| (v - mean) / scale));
        let mut dists: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                dists.push(sq_dist(&xs[i], &xs[j]).sqrt());
            }
        }
        dists.sort_by(f64::total_cmp);
        let median = dists.get(dists.len() / 2).copied().filter(|d| *d > 0.0).unwrap_or(1.0);

        let mut best: Option<(f64, Gp)> = None;
        for m in LENGTHSCALE_GRID {
            let ell2 = (m * median).powi(2);
            let k = DMatrix::from_fn(n, n, |i, j| {
                (-0.5 * sq_dist(&xs[i], &xs[j]) / ell2).exp() + if i == j { NOISE } else { 0.0 }
            });
            let Some(chol) = Cholesky::new(k) else { continue };
            let alpha = chol.solve(&y);
            let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
            let lml = -0.5 * y.dot(&alpha) - 0.5 * log_det;
            if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                best = Some((lml, Gp { xs: xs.to_vec(), alpha, chol, ell2 }));
            }
        }
        best.map(|(_, gp)| gp)
    }

    /// Posterior mean and standard deviation, in standardized units.
    fn predict(&self, x: &[f64]) -> (f64, f64) {
        let k = DVector::from_iterator(self.xs.len(), self.xs.iter().map(|xi| self.kernel(xi, x)));
        let mu = k.dot(&self.alpha);
        let v = self.chol.l().solve_lower_triangular(&k).unwrap_or_else(|| DVector::zeros(k.len()));
        let var = (1.0 + NOISE - v.dot(&v)).max(0.0);
        (mu, var.sqrt())
    }
}

pub(super) fn run<T: Send, F>(ev: &mut Evaluator<'_, T, F>, dim: usize, p: &BoParams, rng: &RandomSource)
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    let mut r = rng.rng();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let observe = |x: Vec<f64>, ev: &mut Evaluator<'_, T, F>, xs: &mut Vec<Vec<f64>>, ys: &mut Vec<f64>| {
        match ev.eval(x.clone()) {
            Some(y) => {
                xs.push(x);
                ys.push(y);
                true
            }
            None => false,
        }
    };
    for k in 0..p.n_init {
        let x = if k == 0 { vec![0.0; dim] } else { (0..dim).map(|_| r.random_range(-1.0..=1.0)).collect() };
        if !observe(x, ev, &mut xs, &mut ys) {
            return;
        }
    }
    let local = Normal::new(0.0, 0.15).expect("valid sigma");
    while !ev.done() {
        let next = match Gp::fit(&xs, &ys) {
            Some(gp) => {
                let incumbent = (0..ys.len()).fold(0, |b, i| if ys[i] > ys[b] { i } else { b });
                let mut cands: Vec<Vec<f64>> = (0..p.n_candidates)
                    .map(|_| (0..dim).map(|_| r.random_range(-1.0..=1.0)).collect())
                    .collect();
                for _ in 0..p.n_local {
                    let mut c: Vec<f64> = xs[incumbent].iter().map(|v| v + local.sample(&mut r)).collect();
                    clip(&mut c);
                    cands.push(c);
                }
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, c) in cands.iter().enumerate() {
                    let (mu, sd) = gp.predict(c);
                    let ucb = mu + p.beta * sd;
                    if ucb > best.0 {
                        best = (ucb, i);
                    }
                }
                cands.swap_remove(best.1)
            }
            None => (0..dim).map(|_| r.random_range(-1.0..=1.0)).collect(),
        };
        if !observe(next, ev, &mut xs, &mut ys) {
            return;
        }
    }
}
