use super::Evaluator;
use crate::error::Result;
use crate::scenario::rng::RandomSource;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Coordinate-wise random search over the Cartesian basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsParams {
    pub epsilon: f64,
    pub iterations: usize,
}

impl Default for RsParams {
    fn default() -> Self {
        Self { epsilon: 0.25, iterations: 100 }
    }
}

pub(super) fn run<T: Send, F>(ev: &mut Evaluator<'_, T, F>, dim: usize, p: &RsParams, rng: &RandomSource)
where
    F: Fn(&[f64]) -> Result<(f64, T)> + Sync,
{
    let mut r = rng.rng();
    let mut x = vec![0.0; dim];
    let Some(mut fx) = ev.eval(x.clone()) else { return };
    let mut order: Vec<usize> = Vec::new();
    for it in 0..p.iterations {
        if it % dim == 0 {
            order = (0..dim).collect();
            order.shuffle(&mut r);
        }
        let i = order[it % dim];
        for sign in [1.0, -1.0] {
            let mut y = x.clone();
            y[i] = (y[i] + sign * p.epsilon).clamp(-1.0, 1.0);
            if y[i] == x[i] {
                continue;
            }
            let Some(fy) = ev.eval(y.clone()) else { return };
            if fy > fx {
                x = y;
                fx = fy;
                break;
            }
        }
    }
}
