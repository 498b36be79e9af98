//! The five optimizers on a smooth concave function with a known maximum.
use advscen::adversary::{optimize_fn, Algorithm, OptimizerParams};
use advscen::scenario::RandomSource;

fn main() -> advscen::Result<()> {
    let target = [0.3, -0.2, 0.5, -0.4];
    let f = |x: &[f64]| 1.0 - x.iter().zip(target).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / 4.0;
    for a in Algorithm::ALL {
        let rec = optimize_fn(f, 4, a, a.default_budget(), &OptimizerParams::default(), &RandomSource::new(0))?;
        println!("{a:>10}: {:>4} queries, best {:.4} (optimum 1)", rec.queries.len(), rec.best_value().unwrap());
    }
    Ok(())
}
