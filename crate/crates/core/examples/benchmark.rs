//! Algorithms x toy suite at a small budget, summarized per algorithm.
use advscen::adversary::{AttackConfig, Algorithm};
use advscen::eval::benchmark;

fn main() {
    let scenes: Vec<_> = advscen::toy::suite().into_iter().map(|(n, s)| (n.to_string(), s)).collect();
    let configs = benchmark::with_algorithms(&AttackConfig::default(), &[Algorithm::Bo, Algorithm::Rs], Some(30));
    let results = benchmark::run(&scenes, &configs);
    print!("{}", benchmark::raw_table(&results).to_text());
    let groups = benchmark::summarize(&results, |c| c.algorithm.to_string());
    print!("{}", benchmark::summary_table("per algorithm", "algorithm", &groups).to_text());
}
