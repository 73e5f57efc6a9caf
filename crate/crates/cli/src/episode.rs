use std::path::Path;

use mpe_core::bots::{policy_factory, Policy};
use mpe_core::engine::{Event, Frame, StreamHasher};
use mpe_core::eval::{build_scenario, Episode, PopulationSpec};
use mpe_core::{Error, Registry, Result};
use serde::Serialize;

use crate::manifest::Manifest;
use crate::{emit, registry, EpisodeArgs, RenderArgs, RunArgs};

pub fn population(reg: &Registry, names: &[String]) -> Result<PopulationSpec> {
    if names.is_empty() {
        return Err(Error::config("the focal population is empty"));
    }
    let factories = names.iter().map(|n| policy_factory(reg, n)).collect::<Result<Vec<_>>>()?;
    Ok(PopulationSpec::uniform(factories))
}

/// Builds the episode described by `a`, either a scenario or a substrate with
/// one policy per slot.
pub fn prepare(a: &EpisodeArgs) -> Result<Episode> {
    let reg = registry(&a.common)?;
    let mut ep = match &a.scenario {
        Some(id) => {
            if !a.policies.is_empty() || !a.roles.is_empty() {
                return Err(Error::config("--policies and --roles do not apply to --scenario; use --focal"));
            }
            build_scenario(&reg, reg.scenario(id)?, &population(&reg, &a.focal)?, a.seed)?
        }
        None => {
            let id = a
                .target
                .as_deref()
                .or(a.substrate.as_deref())
                .ok_or_else(|| Error::config("name a substrate or pass --scenario"))?;
            let sub = reg.substrate(id)?;
            let cfg = reg.substrate_config(id)?;
            let roles = if !a.roles.is_empty() {
                a.roles.clone()
            } else if a.policies.is_empty() || a.policies.len() == cfg.default_roles.len() {
                cfg.default_roles.clone()
            } else if cfg.roles.len() == 1 && (cfg.min_players..=cfg.max_players).contains(&a.policies.len()) {
                vec![cfg.roles[0].clone(); a.policies.len()]
            } else {
                return Err(Error::contract(format!(
                    "{} policies given but {id} seats {}..={} players",
                    a.policies.len(),
                    cfg.min_players,
                    cfg.max_players
                )));
            };
            let names = if a.policies.is_empty() { vec!["random".to_string(); roles.len()] } else { a.policies.clone() };
            if names.len() != roles.len() {
                return Err(Error::contract(format!("{} policies for {} roles", names.len(), roles.len())));
            }
            let env = sub.reset(&roles, a.seed)?;
            let policies = names
                .iter()
                .enumerate()
                .map(|(slot, n)| Ok(policy_factory(&reg, n)?.build(slot, a.seed)))
                .collect::<Result<Vec<Box<dyn Policy>>>>()?;
            Episode::new(id, a.seed, env, policies, (0..roles.len()).collect())?
        }
    };
    if a.max_steps.is_some() {
        ep.env.set_max_steps(a.max_steps);
    }
    Ok(ep)
}

#[derive(Serialize)]
struct Logged<'a> {
    step: u64,
    #[serde(flatten)]
    event: &'a Event,
}

#[derive(Serialize)]
struct RunResult<'a> {
    manifest: &'a Manifest,
    substrate: String,
    scenario: &'a str,
    seed: u64,
    roles: Vec<String>,
    policies: Vec<String>,
    focal: &'a [usize],
    steps: u64,
    returns: Vec<f64>,
    hash: String,
    events: Vec<serde_json::Value>,
}

pub fn run(a: &RunArgs, manifest: Manifest) -> Result<()> {
    let mut ep = prepare(&a.episode)?;
    let n = ep.env.num_players();
    let mut returns = vec![0.0; n];
    let mut hasher = StreamHasher::new();
    let mut events = Vec::new();
    while !ep.env.is_done() {
        let out = ep.step()?;
        for (r, x) in returns.iter_mut().zip(&out.rewards) {
            *r += x;
        }
        hasher.update(&out);
        let step = ep.env.step_count();
        for e in &out.events {
            events.push(serde_json::to_value(Logged { step, event: e }).expect("events serialize"));
        }
    }
    let result = RunResult {
        manifest: &manifest,
        substrate: ep.env.substrate().to_string(),
        scenario: &ep.scenario,
        seed: ep.seed,
        roles: ep.env.roles().iter().map(|r| r.to_string()).collect(),
        policies: ep.policy_names(),
        focal: &ep.focal,
        steps: ep.env.step_count(),
        returns,
        hash: hasher.finish(),
        events,
    };
    let mut bytes = serde_json::to_vec_pretty(&result).expect("result serializes");
    bytes.push(b'\n');
    emit(a.out.as_deref(), &bytes)
}

pub fn render(a: &RenderArgs, manifest: Manifest) -> Result<()> {
    let mut ep = prepare(&a.episode)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(format!("{}: {e}", a.out.display())))?;
    let json = manifest.to_json();
    write_png(&a.out.join(frame_name(0)), &ep.env.render_global(), &json)?;
    while !ep.env.is_done() {
        ep.step()?;
        let i = ep.env.step_count();
        write_png(&a.out.join(frame_name(i)), &ep.env.render_global(), &json)?;
    }
    Ok(())
}

pub fn frame_name(i: u64) -> String {
    format!("frame_{i:05}.png")
}

fn write_png(path: &Path, frame: &Frame, manifest: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::io(format!("{}: {e}", path.display()));
    let png_err = |e: png::EncodingError| Error::io(format!("{}: {e}", path.display()));
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, frame.width as u32, frame.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.add_text_chunk("mpe-version".into(), mpe_core::VERSION.into()).map_err(png_err)?;
        enc.add_text_chunk("manifest".into(), manifest.into()).map_err(png_err)?;
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&frame.data).map_err(png_err)?;
    }
    std::fs::write(path, buf).map_err(io)
}
