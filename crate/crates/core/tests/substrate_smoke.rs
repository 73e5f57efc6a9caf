use mpe_core::engine::rng::stream;
use mpe_core::Registry;
use rand::Rng;

#[test]
fn every_substrate_survives_random_play() {
    let reg = Registry::builtin();
    for id in reg.substrate_ids() {
        let sub = reg.substrate(&id).unwrap();
        for seed in 0..2 {
            let mut env = sub.reset_default(seed).unwrap();
            let mut rng = stream(seed, "test");
            let n = env.num_players();
            for t in 0..400 {
                if env.is_done() {
                    break;
                }
                let acts: Vec<usize> = (0..n).map(|i| rng.gen_range(0..env.action_set(i).len())).collect();
                let out = env.step(&acts).unwrap();
                assert_eq!(env.step_count(), t + 1, "{id}");
                assert!(env.state().occupancy_consistent(), "{id} seed {seed} step {t}");
                let summed: Vec<f64> = (0..n)
                    .map(|p| out.events.iter().flat_map(|e| &e.rewards).filter(|r| r.0 == p).map(|r| r.1).sum())
                    .collect();
                assert_eq!(summed, out.rewards, "{id}");
            }
        }
    }
}
