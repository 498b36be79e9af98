//! Scenarios generated against one stack, replayed against the other.
use advscen::adversary::AttackConfig;
use advscen::autonomy::StackKind;
use advscen::eval::transfer;

fn main() -> advscen::Result<()> {
    let scenes: Vec<_> = advscen::toy::suite().into_iter().map(|(n, s)| (n.to_string(), s)).collect();
    let m = transfer(&scenes, &StackKind::ALL, &AttackConfig::default())?;
    print!("{}", m.table().to_text());
    println!("diagonal dominates: {}", m.diagonal_dominates());
    Ok(())
}
