//! Black-box attack on one toy scene with Bayesian optimization.
use advscen::adversary::{attack, AttackConfig};

fn main() -> advscen::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "cut_in".into());
    let sc = advscen::toy::by_name(&name).ok_or_else(|| advscen::Error::Config(format!("unknown scene {name}")))?;
    let out = attack(&sc, &AttackConfig::default())?;
    let r = &out.record;
    let curve = r.best_so_far();
    for q in [1, 5, 10, 25, 50, 75].into_iter().filter(|&q| q <= curve.len()) {
        println!("query {q:>3}: best {:.3}", curve[q - 1]);
    }
    let best = r.best_query();
    println!(
        "{name}: perturbed actors {:?}, collision steps {} (baseline {}), {:.1} s",
        r.actor_ids,
        best.collision_steps,
        r.baseline().collision_steps,
        r.total_seconds()
    );
    Ok(())
}
