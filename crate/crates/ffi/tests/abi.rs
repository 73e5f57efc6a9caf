use std::ffi::{CStr, CString};

use mpe_core::eval::{build_scenario, PopulationSpec};
use mpe_core::Registry;
use mpe_ffi::*;
use rand::{Rng, SeedableRng};

fn create(id: &str, seed: u64) -> Result<u32, i32> {
    let c = CString::new(id).unwrap();
    let mut h = 0;
    match unsafe { mpe_create(c.as_ptr(), seed, &mut h) } {
        MPE_OK => Ok(h),
        e => Err(e),
    }
}

fn spec(h: u32) -> serde_json::Value {
    let mut len = 0;
    assert_eq!(unsafe { mpe_spec(h, std::ptr::null_mut(), 0, &mut len) }, MPE_ERR_BUFFER);
    let mut buf = vec![0u8; len];
    assert_eq!(unsafe { mpe_spec(h, buf.as_mut_ptr(), buf.len(), &mut len) }, MPE_OK);
    serde_json::from_slice(&buf).unwrap()
}

/// Steps through the ABI; returns the status and, on success, rewards and done.
fn step(h: u32, actions: &[u32]) -> (i32, Vec<f64>, bool) {
    let bytes: Vec<u8> = actions.iter().flat_map(|a| a.to_le_bytes()).collect();
    let mut rewards = vec![0u8; 8 * actions.len().max(1)];
    let mut done = 0u8;
    let s = unsafe { mpe_step(h, bytes.as_ptr(), actions.len() as u32, rewards.as_mut_ptr(), &mut done) };
    let r = rewards
        .chunks_exact(8)
        .take(actions.len())
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    (s, r, done == 1)
}

fn script(arities: &[usize], steps: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..steps).map(|_| arities.iter().map(|&n| rng.gen_range(0..n) as u32).collect()).collect()
}

fn arities(spec: &serde_json::Value) -> Vec<usize> {
    spec["actions"].as_array().unwrap().iter().map(|a| a.as_array().unwrap().len()).collect()
}

#[test]
fn substrate_parity_with_native_run() {
    let reg = Registry::builtin();
    for id in ["coins", "clean_up", "stag_hunt_repeated"] {
        for seed in 0..5 {
            let h = create(id, seed).unwrap();
            let sp = spec(h);
            let mut env = reg.substrate(id).unwrap().reset_default(seed).unwrap();
            assert_eq!(sp["players"], env.num_players());
            for acts in script(&arities(&sp), 300, seed) {
                let (s, r, done) = step(h, &acts);
                assert_eq!(s, MPE_OK);
                let native: Vec<usize> = acts.iter().map(|&a| a as usize).collect();
                let out = env.step(&native).unwrap();
                assert_eq!(r.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), out.rewards.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
                assert_eq!(done, out.done);
                if done {
                    break;
                }
            }
            assert_eq!(mpe_close(h), MPE_OK);
        }
    }
}

#[test]
fn scenario_handle_controls_focal_slots_only() {
    let reg = Registry::builtin();
    let id = "clean_up/SC2";
    let sc = reg.scenario(id).unwrap();
    let h = create(id, 9).unwrap();
    let sp = spec(h);
    assert_eq!(sp["players"], sc.focal);
    assert_eq!(sp["observation"]["rgb"], serde_json::json!([88, 88, 3]));

    let mut ep = build_scenario(reg, sc, &PopulationSpec::random(), 9).unwrap();
    for acts in script(&arities(&sp), 200, 1) {
        let (s, r, _) = step(h, &acts);
        assert_eq!(s, MPE_OK);
        let mut native = ep.actions();
        for (k, a) in acts.iter().enumerate() {
            native[k] = *a as usize;
        }
        let out = ep.env.step(&native).unwrap();
        assert_eq!(r, out.rewards[..sc.focal].to_vec());
    }
    mpe_close(h);
}

#[test]
fn matrix_episode_ends_on_the_check_grid_then_refuses_steps() {
    let h = create("prisoners_dilemma_repeated", 3).unwrap();
    let mut steps = 0u64;
    loop {
        let (s, _, done) = step(h, &[0, 0]);
        assert_eq!(s, MPE_OK);
        steps += 1;
        if done {
            break;
        }
        assert!(steps < 100_000);
    }
    assert!(steps > 1000 && (steps - 1000) % 100 == 0, "ended after {steps}");
    assert_eq!(step(h, &[0, 0]).0, MPE_ERR_DONE);
    mpe_close(h);
}

#[test]
fn rejected_steps_do_not_mutate() {
    let reg = Registry::builtin();
    let h = create("coins", 4).unwrap();
    assert_eq!(step(h, &[0]).0, MPE_ERR_ARITY);
    assert_eq!(step(h, &[0, 0, 0]).0, MPE_ERR_ARITY);
    assert_eq!(step(h, &[0, 999]).0, MPE_ERR_ACTION);
    let mut env = reg.substrate("coins").unwrap().reset_default(4).unwrap();
    for acts in script(&[env.action_set(0).len(), env.action_set(1).len()], 100, 2) {
        let (_, r, _) = step(h, &acts);
        let out = env.step(&[acts[0] as usize, acts[1] as usize]).unwrap();
        assert_eq!(r, out.rewards);
    }
    mpe_close(h);
}

#[test]
fn observe_matches_native_view() {
    let reg = Registry::builtin();
    let h = create("commons_harvest_open", 2).unwrap();
    let env = reg.substrate("commons_harvest_open").unwrap().reset_default(2).unwrap();
    let mut buf = vec![0u8; MPE_OBS_BYTES];
    assert_eq!(unsafe { mpe_observe(h, 3, buf.as_mut_ptr(), buf.len()) }, MPE_OK);
    assert_eq!(buf, env.observe(3).unwrap().rgb);
    assert_eq!(unsafe { mpe_observe(h, 3, buf.as_mut_ptr(), buf.len() - 1) }, MPE_ERR_BUFFER);
    assert_eq!(unsafe { mpe_observe(h, 99, buf.as_mut_ptr(), buf.len()) }, MPE_ERR_PLAYER);
    assert_eq!(unsafe { mpe_observe(h, 0, std::ptr::null_mut(), buf.len()) }, MPE_ERR_NULL);
    mpe_close(h);
}

#[test]
fn lifecycle_and_status_codes() {
    assert_eq!(create("no_such_thing", 0), Err(MPE_ERR_UNKNOWN_ID));
    let mut out = 0;
    assert_eq!(unsafe { mpe_create(std::ptr::null(), 0, &mut out) }, MPE_ERR_NULL);
    let h = create("coins", 0).unwrap();
    assert_eq!(mpe_close(h), MPE_OK);
    assert_eq!(mpe_close(h), MPE_ERR_HANDLE);
    assert_eq!(step(h, &[0, 0]).0, MPE_ERR_HANDLE);
    let mut len = 0;
    assert_eq!(unsafe { mpe_spec(h, std::ptr::null_mut(), 0, &mut len) }, MPE_ERR_HANDLE);
    for code in 0..=MPE_ERR_INTERNAL {
        let msg = unsafe { CStr::from_ptr(mpe_status_message(code)) }.to_str().unwrap();
        assert!(!msg.is_empty() && msg != "unknown status", "{code}");
    }
}

#[test]
fn handles_run_in_parallel_threads() {
    let run = |seed: u64| {
        let h = create("coins", seed).unwrap();
        let mut total = Vec::new();
        for acts in script(&[8, 8], 300, seed) {
            let acts: Vec<u32> = acts.iter().map(|a| a % 5).collect();
            total.extend(step(h, &acts).1);
        }
        mpe_close(h);
        total
    };
    let serial: Vec<_> = (0..4).map(run).collect();
    let parallel: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4).map(|seed| s.spawn(move || run(seed))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(serial, parallel);
}
