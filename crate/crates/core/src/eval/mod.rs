//! Scenario evaluation: populate a substrate with focal policies and
//! background bots, run seeded episodes, and summarise the returns.

pub mod metrics;
pub mod scenario;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use metrics::{aggregate_substrate_score, focal_per_capita, gini, normalize_scores, Inequality};
pub use scenario::{scenario_mode, BotSlot, ScenarioMode, ScenarioSpec};

use crate::bots::{Policy, PolicyFactory, RandomFactory};
use crate::engine::rng::stream;
use crate::engine::{Env, StepOutcome, StreamHasher};
use crate::error::{Error, Result};
use crate::registry::Registry;

/// Role key matching every role in a [`PopulationSpec`].
pub const ANY_ROLE: &str = "*";

/// Policies available to the focal slots, by role.
#[derive(Debug, Clone)]
pub struct PopulationSpec {
    pub policies: BTreeMap<String, Vec<Arc<dyn PolicyFactory>>>,
    pub with_replacement: bool,
}

impl PopulationSpec {
    /// The same policies for every role, sampled with replacement.
    pub fn uniform(policies: Vec<Arc<dyn PolicyFactory>>) -> Self {
        PopulationSpec {
            policies: BTreeMap::from([(ANY_ROLE.to_string(), policies)]),
            with_replacement: true,
        }
    }

    pub fn random() -> Self {
        Self::uniform(vec![Arc::new(RandomFactory)])
    }

    pub fn for_role(&self, role: &str) -> Result<&[Arc<dyn PolicyFactory>]> {
        self.policies
            .get(role)
            .or_else(|| self.policies.get(ANY_ROLE))
            .filter(|p| !p.is_empty())
            .map(Vec::as_slice)
            .ok_or_else(|| Error::config(format!("focal population has no policy for role `{role}`")))
    }

    /// One policy per role in `roles`, drawn from `rng`.
    pub fn sample(&self, roles: &[String], rng: &mut impl Rng) -> Result<Vec<Arc<dyn PolicyFactory>>> {
        let mut left: BTreeMap<&str, Vec<Arc<dyn PolicyFactory>>> = BTreeMap::new();
        let mut out = Vec::with_capacity(roles.len());
        for role in roles {
            let pool = self.for_role(role)?;
            if self.with_replacement {
                out.push(Arc::clone(&pool[rng.gen_range(0..pool.len())]));
                continue;
            }
            let key = if self.policies.contains_key(role.as_str()) { role.as_str() } else { ANY_ROLE };
            let avail = left.entry(key).or_insert_with(|| pool.to_vec());
            if avail.is_empty() {
                return Err(Error::config(format!(
                    "not enough distinct policies for role `{role}` without replacement"
                )));
            }
            let i = rng.gen_range(0..avail.len());
            out.push(avail.swap_remove(i));
        }
        Ok(out)
    }
}

/// A runnable episode: an environment plus one policy per slot.
#[derive(Debug)]
pub struct Episode {
    pub scenario: String,
    pub seed: u64,
    pub env: Env,
    pub policies: Vec<Box<dyn Policy>>,
    /// Slots whose returns count as focal.
    pub focal: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub steps: u64,
    pub returns: Vec<f64>,
    /// SHA-256 of the rewards and events stream.
    pub hash: String,
}

impl Episode {
    pub fn new(scenario: impl Into<String>, seed: u64, env: Env, policies: Vec<Box<dyn Policy>>, focal: Vec<usize>) -> Result<Self> {
        if policies.len() != env.num_players() {
            return Err(Error::contract(format!(
                "{} policies for {} players",
                policies.len(),
                env.num_players()
            )));
        }
        Ok(Episode { scenario: scenario.into(), seed, env, policies, focal })
    }

    pub fn policy_names(&self) -> Vec<String> {
        self.policies.iter().map(|p| p.name().to_string()).collect()
    }

    pub fn actions(&mut self) -> Vec<usize> {
        let env = &self.env;
        self.policies
            .iter_mut()
            .enumerate()
            .map(|(i, p)| p.act(env, i))
            .collect()
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        let actions = self.actions();
        self.env.step(&actions)
    }

    /// Runs to the end, calling `each` after every step.
    pub fn run_with(mut self, mut each: impl FnMut(&Env, &StepOutcome)) -> Result<EpisodeResult> {
        let n = self.env.num_players();
        let mut returns = vec![0.0; n];
        let mut hasher = StreamHasher::new();
        while !self.env.is_done() {
            let out = self.step()?;
            for (r, x) in returns.iter_mut().zip(&out.rewards) {
                *r += x;
            }
            hasher.update(&out);
            each(&self.env, &out);
        }
        Ok(EpisodeResult {
            seed: self.seed,
            steps: self.env.step_count(),
            returns,
            hash: hasher.finish(),
        })
    }

    pub fn run(self) -> Result<EpisodeResult> {
        self.run_with(|_, _| {})
    }
}

/// Options shared by every episode of a batch.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Hard cap on episode length on top of the substrate's law.
    pub max_steps: Option<u64>,
    pub inequality: Inequality,
}

/// Fills all but the first `focal` slots with the scenario's bots and the
/// rest from `focal`, then resets the substrate with `seed`.
pub fn build_scenario(reg: &Registry, spec: &ScenarioSpec, focal: &PopulationSpec, seed: u64) -> Result<Episode> {
    build_scenario_with(reg, spec, focal, seed, &RunOptions::default())
}

pub fn build_scenario_with(
    reg: &Registry,
    spec: &ScenarioSpec,
    focal: &PopulationSpec,
    seed: u64,
    opts: &RunOptions,
) -> Result<Episode> {
    let substrate = reg.substrate(&spec.substrate)?;
    let mut env = substrate.reset(&spec.roles, seed)?;
    if opts.max_steps.is_some() {
        env.set_max_steps(opts.max_steps);
    }
    let mut rng = stream(seed, "focal");
    let chosen = focal.sample(&spec.roles[..spec.focal], &mut rng)?;
    let mut policies: Vec<Box<dyn Policy>> = chosen
        .iter()
        .enumerate()
        .map(|(slot, f)| f.build(slot, seed))
        .collect();
    let mut pool_rng = stream(seed, "background");
    for (k, slot) in spec.bots.iter().enumerate() {
        let names = slot.names();
        let name = if names.len() == 1 { names[0] } else { names[pool_rng.gen_range(0..names.len())] };
        let bot = Arc::new(reg.bot(name)?.clone());
        let player = spec.focal + k;
        policies.push(Box::new(bot.controller(player, stream(seed, &format!("bot/{player}")))));
    }
    Episode::new(spec.id.clone(), seed, env, policies, spec.focal_slots().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRow {
    pub scenario: String,
    pub seed: u64,
    pub steps: u64,
    pub focal_per_capita: f64,
    pub background_per_capita: Option<f64>,
    pub background_inequality: Option<f64>,
    pub collective_return: f64,
    pub returns: Vec<f64>,
    pub hash: String,
}

impl EpisodeRow {
    pub fn from_result(scenario: &str, focal: usize, r: &EpisodeResult, ineq: Inequality) -> Result<Self> {
        let slots: Vec<usize> = (0..focal).collect();
        let bg = &r.returns[focal..];
        Ok(EpisodeRow {
            scenario: scenario.to_string(),
            seed: r.seed,
            steps: r.steps,
            focal_per_capita: focal_per_capita(&r.returns, &slots)?,
            background_per_capita: (!bg.is_empty()).then(|| metrics::mean(bg)),
            background_inequality: (!bg.is_empty()).then(|| ineq.measure(bg)),
            collective_return: r.returns.iter().sum(),
            returns: r.returns.clone(),
            hash: r.hash.clone(),
        })
    }
}

/// Summary of a batch of episodes of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub substrate: String,
    pub mode: ScenarioMode,
    pub focal: usize,
    pub players: usize,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub inequality: Inequality,
    pub focal_per_capita: f64,
    pub focal_stderr: f64,
    pub background_per_capita: Option<f64>,
    /// Inequality of background returns; Gini unless configured otherwise.
    pub background_gini: Option<f64>,
    pub collective_return: f64,
    /// Mean return per slot.
    pub per_player_returns: Vec<f64>,
    pub rows: Vec<EpisodeRow>,
}

impl MetricsReport {
    /// Averages `rows` after sorting them by seed, so the order episodes
    /// finished in does not matter.
    pub fn from_rows(spec: &ScenarioSpec, mut rows: Vec<EpisodeRow>, inequality: Inequality) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::contract("a batch needs at least one episode"));
        }
        rows.sort_by_key(|r| r.seed);
        let col = |f: &dyn Fn(&EpisodeRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
        let focal = col(&|r| r.focal_per_capita);
        let opt = |f: &dyn Fn(&EpisodeRow) -> Option<f64>| -> Option<f64> {
            let xs: Option<Vec<f64>> = rows.iter().map(f).collect();
            xs.map(|xs| metrics::mean(&xs))
        };
        let n = spec.players();
        let per_player = (0..n).map(|i| metrics::mean(&col(&|r| r.returns[i]))).collect();
        Ok(MetricsReport {
            scenario: spec.id.clone(),
            substrate: spec.substrate.clone(),
            mode: spec.mode(),
            focal: spec.focal,
            players: n,
            episodes: rows.len(),
            seeds: rows.iter().map(|r| r.seed).collect(),
            inequality,
            focal_per_capita: metrics::mean(&focal),
            focal_stderr: metrics::stderr(&focal),
            background_per_capita: opt(&|r| r.background_per_capita),
            background_gini: opt(&|r| r.background_inequality),
            collective_return: metrics::mean(&col(&|r| r.collective_return)),
            per_player_returns: per_player,
            rows,
        })
    }
}

/// Runs `episodes` episodes with seeds `base_seed..base_seed + episodes`.
pub fn run_batch(
    reg: &Registry,
    spec: &ScenarioSpec,
    focal: &PopulationSpec,
    episodes: usize,
    base_seed: u64,
) -> Result<MetricsReport> {
    let seeds: Vec<u64> = (0..episodes as u64).map(|i| base_seed + i).collect();
    run_seeds(reg, spec, focal, &seeds, &RunOptions::default())
}

/// Runs one episode per seed, in parallel on the current rayon pool.
pub fn run_seeds(
    reg: &Registry,
    spec: &ScenarioSpec,
    focal: &PopulationSpec,
    seeds: &[u64],
    opts: &RunOptions,
) -> Result<MetricsReport> {
    if seeds.is_empty() {
        return Err(Error::contract("a batch needs at least one episode"));
    }
    let results: Vec<Result<EpisodeRow>> = seeds
        .par_iter()
        .map(|&seed| {
            let r = build_scenario_with(reg, spec, focal, seed, opts)?.run()?;
            EpisodeRow::from_result(&spec.id, spec.focal, &r, opts.inequality)
        })
        .collect();
    let mut rows = Vec::with_capacity(seeds.len());
    for (seed, r) in seeds.iter().zip(results) {
        rows.push(r.map_err(|e| e.context(format!("{} seed {seed}", spec.id)))?);
    }
    MetricsReport::from_rows(spec, rows, opts.inequality)
}
