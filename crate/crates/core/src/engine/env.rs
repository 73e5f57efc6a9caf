use std::any::Any;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::action::{ActionKind, ActionSet, BeamSpec, Contact, CustomAction, Move};
use super::beam::{cast_beam, BeamHit};
use super::event::{Event, EventKind};
use super::geometry::{Orientation, Pos};
use super::map::{CellTags, MapLayout};
use super::render::{self, Frame, Observation, Palette};
use super::rng::{RngStreams, Stream};
use super::state::{AvatarState, GridState, Resource, FOREVER};
use crate::error::{Error, Result};

/// Substrate-specific dynamics plugged into the shared step loop.
///
/// Every hook has a do-nothing default so that a substrate only spells out
/// what makes it different.
pub trait Rules: Send + fmt::Debug {
    fn action_set(&self, role: &str) -> ActionSet;

    /// Called once per episode after avatars are placed.
    fn setup(&mut self, st: &mut GridState) -> Result<()>;

    /// Whether `player` may step onto `to` as far as terrain goes; resources
    /// and avatars are checked separately.
    fn passable(&self, st: &GridState, _player: usize, to: Pos) -> bool {
        st.terrain(to).passable()
    }

    fn beam_contact(&self, beam: &BeamSpec, _r: &Resource) -> Contact {
        beam.resources
    }

    fn on_beam(&mut self, _st: &mut GridState, _actor: usize, _beam: &BeamSpec, _hit: &BeamHit) {}

    fn on_custom(&mut self, _st: &mut GridState, _actor: usize, _action: CustomAction) {}

    /// A move was refused because the target holds a movement-blocking resource.
    fn on_bump(&mut self, _st: &mut GridState, _actor: usize, _cell: Pos) {}

    /// The avatar stands on its cell after movement.
    fn on_contact(&mut self, _st: &mut GridState, _player: usize) {}

    /// Per-step world dynamics.
    fn tick(&mut self, _st: &mut GridState) {}

    /// Substrate-driven end of episode, checked before the step-count law.
    fn finished(&self, _st: &GridState) -> bool {
        false
    }

    fn aux(&self, _st: &GridState, _player: usize) -> Vec<(&'static str, Vec<f64>)> {
        Vec::new()
    }

    fn as_any(&self) -> &dyn Any;
}

/// Episode-length law: no end before `min_steps`; after that a
/// Bernoulli(`end_probability`) draw every `check_interval` steps; a hard
/// stop at `max_steps` when set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Termination {
    pub min_steps: u64,
    #[serde(default = "default_interval")]
    pub check_interval: u64,
    #[serde(default)]
    pub end_probability: f64,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

fn default_interval() -> u64 {
    100
}

impl Termination {
    pub fn fixed(steps: u64) -> Self {
        Termination {
            min_steps: steps,
            check_interval: 100,
            end_probability: 0.0,
            max_steps: Some(steps),
        }
    }

    /// Whether the episode ends once `steps_done` steps have completed.
    /// Draws from `rng` only on check boundaries.
    pub fn sample(&self, steps_done: u64, rng: &mut Stream) -> bool {
        if self.max_steps.is_some_and(|m| steps_done >= m) {
            return true;
        }
        if steps_done <= self.min_steps || self.end_probability <= 0.0 {
            return false;
        }
        let since = steps_done - self.min_steps;
        since % self.check_interval.max(1) == 0 && rng.gen_bool(self.end_probability.min(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub events: Vec<Event>,
    pub done: bool,
}

/// One running episode.
#[derive(Debug)]
pub struct Env {
    substrate: String,
    rules: Box<dyn Rules>,
    state: GridState,
    action_sets: Vec<ActionSet>,
    termination: Termination,
    palette: Arc<Palette>,
    last_events: Vec<Event>,
    done: bool,
}

/// Everything needed to start an episode, independent of the seed.
#[derive(Debug, Clone)]
pub struct EpisodeSetup {
    pub substrate: String,
    pub layout: Arc<MapLayout>,
    pub termination: Termination,
    pub palette: Arc<Palette>,
}

impl Env {
    pub fn new(
        setup: &EpisodeSetup,
        mut rules: Box<dyn Rules>,
        roles: &[String],
        seed: u64,
    ) -> Result<Self> {
        let mut rng = RngStreams::new(seed);
        let mut spawn_order = setup.layout.spawn_cells();
        if roles.len() > spawn_order.len() {
            return Err(Error::config(format!(
                "{} players requested but map `{}` has {} spawn cells",
                roles.len(),
                setup.layout.name,
                spawn_order.len()
            )));
        }
        spawn_order.shuffle(&mut rng.spawn);
        let respawn_order = spawn_order
            .iter()
            .copied()
            .filter(|p| !setup.layout.cell(*p).tags.contains(CellTags::INNER))
            .collect();
        let action_sets = roles.iter().map(|r| rules.action_set(r)).collect();

        let mut st = GridState::new(setup.layout.clone(), rng);
        st.spawn_order = spawn_order;
        st.respawn_order = respawn_order;
        for (i, role) in roles.iter().enumerate() {
            let orientation = Orientation::from_index(st.rng.spawn.gen_range(0..4));
            st.avatars.push(AvatarState {
                player: i,
                role: role.clone(),
                pos: st.spawn_order[i],
                orientation,
                frozen_until: None,
                removed_until: None,
                inventory: Vec::new(),
                tint: None,
                beam_ready_at: [0; super::action::BeamKind::SLOTS],
            });
            let p = st.spawn_order[i];
            st.place(i, p);
        }
        rules.setup(&mut st)?;
        st.pending_events.clear();
        Ok(Env {
            substrate: setup.substrate.clone(),
            rules,
            state: st,
            action_sets,
            termination: setup.termination,
            palette: setup.palette.clone(),
            last_events: Vec::new(),
            done: false,
        })
    }

    pub fn substrate(&self) -> &str {
        &self.substrate
    }

    pub fn num_players(&self) -> usize {
        self.state.avatars.len()
    }

    pub fn roles(&self) -> Vec<&str> {
        self.state.avatars.iter().map(|a| a.role.as_str()).collect()
    }

    pub fn action_set(&self, player: usize) -> &ActionSet {
        &self.action_sets[player]
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    /// Direct state access for scripted test setups.
    pub fn state_mut(&mut self) -> &mut GridState {
        &mut self.state
    }

    pub fn rules(&self) -> &dyn Rules {
        self.rules.as_ref()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn set_max_steps(&mut self, max: Option<u64>) {
        self.termination.max_steps = max;
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step_count(&self) -> u64 {
        self.state.step
    }

    /// Events of the most recent step.
    pub fn last_events(&self) -> &[Event] {
        &self.last_events
    }

    pub fn observe(&self, player: usize) -> Result<Observation> {
        if player >= self.num_players() {
            return Err(Error::contract(format!("no player {player}")));
        }
        Ok(Observation {
            rgb: render::egocentric(&self.state, player, &self.palette),
            aux: self
                .rules
                .aux(&self.state, player)
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        })
    }

    pub fn render_global(&self) -> Frame {
        render::global(&self.state, &self.palette)
    }

    /// Advances one step. `actions` holds one index per player slot; entries
    /// for removed players are validated but ignored.
    pub fn step(&mut self, actions: &[usize]) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::contract("step called on a finished episode"));
        }
        let n = self.num_players();
        if actions.len() != n {
            return Err(Error::contract(format!(
                "expected {n} actions, got {}",
                actions.len()
            )));
        }
        let mut kinds = Vec::with_capacity(n);
        for (i, &a) in actions.iter().enumerate() {
            let k = self.action_sets[i].kind(a).ok_or_else(|| {
                Error::contract(format!(
                    "player {i}: action {a} out of range 0..{}",
                    self.action_sets[i].len()
                ))
            })?;
            kinds.push(k);
        }

        let st = &mut self.state;
        let rules = &mut self.rules;
        let now = st.step;
        let can_act = |st: &GridState, i: usize| {
            let a = &st.avatars[i];
            !a.is_removed() && !a.is_frozen(now)
        };

        // 1. beams and substrate actions, in actor order
        for (i, kind) in kinds.iter().enumerate() {
            if !can_act(st, i) {
                continue;
            }
            match *kind {
                ActionKind::Beam(beam) => {
                    let slot = beam.kind.slot();
                    if now < st.avatars[i].beam_ready_at[slot] {
                        continue;
                    }
                    st.avatars[i].beam_ready_at[slot] = now + u64::from(beam.cooldown);
                    let hit = cast_beam(st, i, &beam, |r| rules.beam_contact(&beam, r));
                    rules.on_beam(st, i, &beam, &hit);
                }
                ActionKind::Custom(c) => rules.on_custom(st, i, c),
                _ => {}
            }
        }

        // 2. turns, then moves in a seeded priority order
        for (i, kind) in kinds.iter().enumerate() {
            if !can_act(st, i) {
                continue;
            }
            let a = &mut st.avatars[i];
            match kind {
                ActionKind::TurnLeft => a.orientation = a.orientation.left(),
                ActionKind::TurnRight => a.orientation = a.orientation.right(),
                _ => {}
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut st.rng.collision);
        for &i in &order {
            let ActionKind::Move(m) = kinds[i] else { continue };
            if !can_act(st, i) {
                continue;
            }
            let a = &st.avatars[i];
            let dir = match m {
                Move::Forward => a.orientation,
                Move::Backward => a.orientation.opposite(),
                Move::StrafeLeft => a.orientation.left(),
                Move::StrafeRight => a.orientation.right(),
            };
            let to = a.pos.step(dir);
            if !st.in_bounds(to) || !rules.passable(st, i, to) {
                continue;
            }
            if st.resource(to).is_some_and(Resource::blocks_movement) {
                rules.on_bump(st, i, to);
                continue;
            }
            if st.avatar_at(to).is_none() {
                st.move_avatar(i, to);
            }
        }

        // 3. contacts, world dynamics, respawns
        for i in 0..n {
            if !st.avatars[i].is_removed() {
                rules.on_contact(st, i);
            }
        }
        rules.tick(st);
        for i in 0..n {
            let Some(until) = st.avatars[i].removed_until else { continue };
            if until == FOREVER || now < until {
                continue;
            }
            if let Some(p) = st.free_respawn_cell() {
                st.place(i, p);
                st.avatars[i].frozen_until = None;
                st.emit(Event::new(EventKind::Respawned, i).at(p));
            }
        }

        // 4. rewards
        let events = std::mem::take(&mut st.pending_events);
        let mut rewards = vec![0.0; n];
        for e in &events {
            for &(p, r) in &e.rewards {
                rewards[p] += r;
            }
        }
        st.step += 1;
        self.done = rules.finished(st) || self.termination.sample(st.step, &mut st.rng.termination);
        self.last_events = events.clone();
        Ok(StepOutcome {
            rewards,
            events,
            done: self.done,
        })
    }
}

/// SHA-256 over the serialized (rewards, events) stream of an episode.
#[derive(Debug, Clone, Default)]
pub struct StreamHasher {
    hasher: Sha256,
}

impl StreamHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, outcome: &StepOutcome) {
        let bytes = serde_json::to_vec(&(&outcome.rewards, &outcome.events))
            .expect("step outcomes always serialize");
        self.hasher.update(&bytes);
    }

    pub fn finish(self) -> String {
        self.hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl GridState {
    /// Freezes `player` for the `steps` steps following the current one.
    pub fn freeze_for(&mut self, player: usize, steps: u64) {
        if steps > 0 {
            let until = self.step + 1 + steps;
            self.freeze(player, until);
        }
    }

    /// Removes `player` for `steps` steps; [`FOREVER`] removes for good.
    pub fn remove_for(&mut self, player: usize, steps: u64) {
        let until = if steps == FOREVER {
            FOREVER
        } else {
            self.step.saturating_add(steps)
        };
        self.remove(player, until);
    }
}
