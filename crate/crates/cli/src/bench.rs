use std::time::Instant;

use mpe_core::bots::{Policy, RandomPolicy};
use mpe_core::bots::policy::policy_stream;
use mpe_core::{Error, Result};
use serde::Serialize;

use crate::manifest::Manifest;
use crate::{emit, registry, BenchArgs};

const WARMUP: u64 = 100;

#[derive(Serialize)]
struct Row {
    substrate: String,
    players: usize,
    steps: u64,
    seconds: f64,
    steps_per_sec: f64,
    /// Steps times players: the single-player-equivalent rate.
    player_steps_per_sec: f64,
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    manifest: &'a Manifest,
    single_thread: bool,
    release_build: bool,
    results: Vec<Row>,
}

/// Random policies on each substrate's default roles, one thread. Episodes
/// that end are restarted with the next seed.
pub fn bench(a: &BenchArgs, manifest: Manifest) -> Result<()> {
    if a.steps == 0 {
        return Err(Error::contract("--steps must be at least 1"));
    }
    let reg = registry(&a.common)?;
    let ids = if a.substrate.is_empty() { reg.substrate_ids() } else { a.substrate.clone() };
    let mut results = Vec::new();
    for id in ids {
        let sub = reg.substrate(&id)?;
        let mut seed = a.seed;
        let mut env = sub.reset_default(seed)?;
        let n = env.num_players();
        let mut policies: Vec<RandomPolicy> = (0..n).map(|i| RandomPolicy::new(policy_stream(seed, i))).collect();
        let mut actions = vec![0; n];
        let mut timed = 0;
        let mut start = Instant::now();
        for k in 0..WARMUP + a.steps {
            if k == WARMUP {
                start = Instant::now();
            }
            if env.is_done() {
                seed += 1;
                env = sub.reset_default(seed)?;
            }
            for (i, p) in policies.iter_mut().enumerate() {
                actions[i] = p.act(&env, i);
            }
            env.step(&actions)?;
            timed += u64::from(k >= WARMUP);
        }
        let secs = start.elapsed().as_secs_f64().max(1e-9);
        let rate = timed as f64 / secs;
        eprintln!("{id}: {rate:.0} steps/s, {:.0} player-steps/s", rate * n as f64);
        results.push(Row {
            substrate: id,
            players: n,
            steps: timed,
            seconds: secs,
            steps_per_sec: rate,
            player_steps_per_sec: rate * n as f64,
        });
    }
    let out = BenchOutput {
        manifest: &manifest,
        single_thread: true,
        release_build: !cfg!(debug_assertions),
        results,
    };
    let mut json = serde_json::to_vec_pretty(&out).expect("bench serializes");
    json.push(b'\n');
    emit(a.out.as_deref(), &json)
}
