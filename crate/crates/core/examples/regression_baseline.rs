//! Regenerates `data/regression_baseline.json` (BO vs RS and the transfer
//! matrix under the committed seeds).
//!
//!     cargo run --release --example regression_baseline
#[path = "../tests/common/regression.rs"]
mod regression;

fn main() -> advscen::Result<()> {
    let b = regression::compute()?;
    println!("BO collision@5s {:.3}, RS {:.3}", b.bo_collision_5s, b.rs_collision_5s);
    println!("transfer collision@5s {:?} (diagonal dominates: {})", b.transfer_collision_5s, regression::diagonal_dominates(&b.transfer_collision_5s));
    println!("transfer L2@5s {:?}", b.transfer_l2_5s);
    let text = serde_json::to_string_pretty(&b).expect("baseline serializes") + "\n";
    std::fs::write(regression::PATH, text).map_err(|e| advscen::Error::io(regression::PATH, e))?;
    println!("wrote {}", regression::PATH);
    Ok(())
}
