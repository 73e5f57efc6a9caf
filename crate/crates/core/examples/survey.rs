//! Random focal population on every scenario, two short episodes each.
//! `cargo run --example survey -- coins` limits the run to matching ids.

use mpe_core::eval::{run_seeds, PopulationSpec, RunOptions};
use mpe_core::Registry;

fn main() {
    let reg = Registry::builtin();
    let filter = std::env::args().nth(1).unwrap_or_default();
    let opts = RunOptions { max_steps: Some(1000), ..Default::default() };
    for s in reg.scenarios() {
        if !s.id.contains(&filter) {
            continue;
        }
        let r = run_seeds(reg, s, &PopulationSpec::random(), &[1, 2], &opts).unwrap();
        println!(
            "{:50} focal {:8.2} bg {:8.2?} per-player {:?}",
            s.id,
            r.focal_per_capita,
            r.background_per_capita,
            r.per_player_returns.iter().map(|x| (x * 10.0).round() / 10.0).collect::<Vec<_>>()
        );
    }
}
