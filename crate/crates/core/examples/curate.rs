//! Picks the most interactive 6 s window of a synthetic 20 s log.
use advscen::eval::curate;
use advscen::scenario::RandomSource;

fn main() -> advscen::Result<()> {
    // Quiet road, then a slow group in both side lanes around x = 80..110.
    let cars: Vec<(f64, f64, f64)> = (0..4).flat_map(|i| [(78.0 + 8.0 * i as f64, 3.0, 2.0), (82.0 + 8.0 * i as f64, -3.0, 2.0)]).collect();
    let log = advscen::toy::long_log(40, &cars);
    let c = curate(&log, &RandomSource::new(0))?;
    for (start, score) in &c.scores {
        println!("window at step {start:>2}: collision fraction {score:.3}");
    }
    println!("chosen: step {} ({} actors)", c.start, c.scenario.actors.len());
    Ok(())
}
