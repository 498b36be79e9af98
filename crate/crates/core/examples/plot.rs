//! Writes a best-so-far plot and a before/after scene render to a temp dir.
use advscen::adversary::{attack, AttackConfig, Algorithm};
use advscen::eval::plot::{best_so_far_svg, save_svg, scene_svg};

fn main() -> advscen::Result<()> {
    let sc = advscen::toy::merge_from_left();
    let dir = std::env::temp_dir();
    let mut curves = Vec::new();
    let mut last = None;
    for algorithm in [Algorithm::Bo, Algorithm::Rs] {
        let out = attack(&sc, &AttackConfig { algorithm, budget: Some(75), ..AttackConfig::default() })?;
        curves.push((algorithm.to_string(), out.record.queries.iter().map(|q| q.value).collect()));
        last = Some(out);
    }
    save_svg(&dir.join("advscen_curves.svg"), &best_so_far_svg("merge_from_left", &curves))?;
    let out = last.unwrap();
    save_svg(&dir.join("advscen_before.svg"), &scene_svg("original", &sc, Some(&out.baseline_plan.trajectory)))?;
    save_svg(&dir.join("advscen_after.svg"), &scene_svg("adversarial", &out.scenario, Some(&out.plan.trajectory)))?;
    println!("wrote advscen_curves.svg, advscen_before.svg, advscen_after.svg to {}", dir.display());
    Ok(())
}
