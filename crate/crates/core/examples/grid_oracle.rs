//! Regenerates `data/grid_oracle.json`: exhaustive search over a 5-level
//! grid of reduced perturbations for every toy scene, sensor stack.
//!
//!     cargo run --release --example grid_oracle [out.json]
use advscen::adversary::{grid_oracle, AttackConfig};
use advscen::autonomy::StackKind;
use serde_json::json;
use std::time::Instant;

const LEVELS: usize = 5;

fn main() -> advscen::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/grid_oracle.json").to_string());
    let config = AttackConfig {
        stack: StackKind::Sensor,
        ..AttackConfig::default()
    };
    let mut scenes = Vec::new();
    for (name, sc) in advscen::toy::suite() {
        let t0 = Instant::now();
        let g = grid_oracle(&sc, &config.stack, &config, LEVELS)?;
        println!(
            "{name:>16}: {:>5} of {} colliding, witness {:?} ({:.1} s)",
            g.n_colliding,
            g.n_evaluated,
            g.witness,
            t0.elapsed().as_secs_f64()
        );
        scenes.push(json!({ "name": name, "content_hash": sc.content_hash(), "oracle": g }));
    }
    let doc = json!({
        "levels": LEVELS,
        "stack": config.stack,
        "seed": config.seed,
        "n_sample": config.n_sample,
        "scenes": scenes,
    });
    std::fs::write(&out, serde_json::to_string_pretty(&doc).expect("json") + "\n").map_err(|e| advscen::Error::io(&out, e))?;
    println!("wrote {out}");
    Ok(())
}
