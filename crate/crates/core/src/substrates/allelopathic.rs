//! Allelopathic Harvest: players recolour berry plants toward the colour
//! they prefer; a colour ripens faster the more plants share it.

use std::any::Any;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ready;
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Contact, Event, EventKind,
    GridState, Payload, Pos, Resource, Rgb, Rules,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllelopathicParams {
    pub colors: u8,
    /// Colour index each role prefers.
    pub preferences: BTreeMap<String, u8>,
    pub ripen_rate: f64,
    pub preferred_reward: f64,
    pub other_reward: f64,
    /// p_white = min(1, white_scale / largest colour fraction).
    pub white_scale: f64,
    pub plant_length: u8,
    pub plant_cooldown: u32,
    pub zap_length: u8,
    pub zap_cooldown: u32,
    pub freeze_steps: u64,
    pub mark_steps: u64,
    pub removal_steps: u64,
    pub penalty: f64,
    /// Avatar colour after planting each berry colour.
    pub tints: Vec<Rgb>,
    pub white: Rgb,
}

/// Per-step ripening probability of an unripe berry whose colour has `b`
/// plants on the map.
pub fn berry_ripen_prob(b: usize, rate: f64) -> f64 {
    rate * b as f64
}

/// Reward for eating a berry; zero (and no effect) when unripe.
pub fn berry_consume(preference: u8, color: u8, ripe: bool, p: &AllelopathicParams) -> f64 {
    if !ripe {
        0.0
    } else if color == preference {
        p.preferred_reward
    } else {
        p.other_reward
    }
}

/// Probability that eating turns the avatar white, given berry counts per
/// colour.
pub fn white_prob(counts: &[usize], scale: f64) -> f64 {
    let total: usize = counts.iter().sum();
    let max = counts.iter().copied().max().unwrap_or(0);
    if total == 0 || max == 0 {
        return 1.0;
    }
    (scale / (max as f64 / total as f64)).min(1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SanctionState {
    /// Zaps before this step count as repeat offences.
    pub marked_until: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZapEffect {
    Freeze { steps: u64 },
    Remove { steps: u64 },
}

/// Applies one zap received at step `now`.
pub fn allelopathic_zap_resolve(s: &mut SanctionState, now: u64, p: &AllelopathicParams) -> ZapEffect {
    if s.marked_until.is_some_and(|m| now < m) {
        s.marked_until = None;
        ZapEffect::Remove { steps: p.removal_steps }
    } else {
        s.marked_until = Some(now + p.mark_steps);
        ZapEffect::Freeze { steps: p.freeze_steps }
    }
}

#[derive(Debug)]
pub struct AllelopathicRules {
    p: AllelopathicParams,
    preference: Vec<u8>,
    sanctions: Vec<SanctionState>,
    berries: Vec<Pos>,
}

impl AllelopathicRules {
    pub fn new(p: AllelopathicParams, roles: &[String]) -> Self {
        let preference = roles
            .iter()
            .map(|r| p.preferences.get(r).copied().unwrap_or(0))
            .collect();
        AllelopathicRules {
            p,
            preference,
            sanctions: vec![SanctionState::default(); roles.len()],
            berries: Vec::new(),
        }
    }

    pub fn params(&self) -> &AllelopathicParams {
        &self.p
    }

    pub fn preference(&self, player: usize) -> u8 {
        self.preference[player]
    }

    pub fn sanction(&self, player: usize) -> SanctionState {
        self.sanctions[player]
    }

    pub fn berry_cells(&self) -> &[Pos] {
        &self.berries
    }

    /// Plants per colour, ripe or not.
    pub fn counts(&self, st: &GridState) -> Vec<usize> {
        let mut c = vec![0; self.p.colors as usize];
        for p in &self.berries {
            if let Some(Resource::Berry { color, .. }) = st.resource(*p) {
                c[*color as usize] += 1;
            }
        }
        c
    }

    fn plant_beam(&self, color: u8) -> BeamSpec {
        BeamSpec {
            kind: BeamKind::Plant(color),
            length: self.p.plant_length,
            cooldown: self.p.plant_cooldown,
            hits_avatars: false,
            resources: Contact::Pass,
            penetrate: 0,
        }
    }
}

const PLANT_NAMES: [&str; 3] = ["plant_red", "plant_green", "plant_blue"];

impl Rules for AllelopathicRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        let mut extras: Vec<(&'static str, ActionKind)> = (0..self.p.colors.min(3))
            .map(|c| (PLANT_NAMES[c as usize], ActionKind::Beam(self.plant_beam(c))))
            .collect();
        let mut zap = BeamSpec::zap(self.p.zap_length, self.p.zap_cooldown);
        // berries cover a large part of the map; the zap flies over them
        zap.resources = Contact::Pass;
        extras.push(("zap", ActionKind::Beam(zap)));
        ActionSet::new(extras)
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.berries = st.layout.positions_with(CellTags::SITE);
        let init = st.layout.positions_with(CellTags::SITE | CellTags::INIT);
        let k = self.p.colors as usize;
        if k == 0 || init.len() % k != 0 {
            return Err(Error::config(format!(
                "{} initial berries cannot be split evenly over {k} colours",
                init.len()
            )));
        }
        let mut colors: Vec<u8> = (0..init.len()).map(|i| (i % k) as u8).collect();
        colors.shuffle(&mut st.rng.dynamics);
        for (p, c) in init.into_iter().zip(colors) {
            st.set_resource(p, Some(Resource::Berry { color: c, ripe: false }));
        }
        self.sanctions = vec![SanctionState::default(); st.num_players()];
        Ok(())
    }

    fn beam_contact(&self, beam: &BeamSpec, r: &Resource) -> Contact {
        match (beam.kind, r) {
            (BeamKind::Plant(_), Resource::Berry { ripe: false, .. }) => Contact::Hit,
            (BeamKind::Plant(_), Resource::Berry { ripe: true, .. }) => Contact::Block,
            _ => beam.resources,
        }
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        match beam.kind {
            BeamKind::Plant(color) => {
                for &p in &hit.resources {
                    if let Some(Resource::Berry { color: c, .. }) = st.resource_mut(p) {
                        if *c != color {
                            *c = color;
                            st.emit(Event::new(EventKind::Planted, actor).at(p).payload(Payload::Kind(color)));
                        }
                    }
                }
                st.avatars[actor].tint = self.p.tints.get(color as usize).copied();
            }
            BeamKind::Zap => {
                let Some(t) = hit.player else { return };
                st.emit(Event::new(EventKind::ZapHit, actor).on(t));
                match allelopathic_zap_resolve(&mut self.sanctions[t], st.step, &self.p) {
                    ZapEffect::Freeze { steps } => {
                        st.freeze_for(t, steps);
                        st.emit(Event::new(EventKind::Frozen, actor).on(t).payload(Payload::Steps(steps)));
                    }
                    ZapEffect::Remove { steps } => {
                        st.remove_for(t, steps);
                        st.emit(
                            Event::new(EventKind::Sanctioned, actor)
                                .on(t)
                                .payload(Payload::Steps(steps))
                                .reward(t, self.p.penalty),
                        );
                    }
                }
            }
            _ => {}
        }
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        let Some(Resource::Berry { color, ripe: true }) = st.resource(pos).cloned() else { return };
        let reward = berry_consume(self.preference[player], color, true, &self.p);
        st.set_resource(pos, Some(Resource::Berry { color, ripe: false }));
        st.emit(
            Event::new(EventKind::ResourceEaten, player)
                .at(pos)
                .payload(Payload::Kind(color))
                .reward(player, reward),
        );
        let pw = white_prob(&self.counts(st), self.p.white_scale);
        if st.rng.dynamics.gen_bool(pw) {
            st.avatars[player].tint = Some(self.p.white);
        }
    }

    fn tick(&mut self, st: &mut GridState) {
        let counts = self.counts(st);
        for &p in &self.berries {
            if let Some(Resource::Berry { color, ripe: false }) = st.resource(p).cloned() {
                let prob = berry_ripen_prob(counts[color as usize], self.p.ripen_rate);
                if prob > 0.0 && st.rng.regrowth.gen_bool(prob.min(1.0)) {
                    st.set_resource(p, Some(Resource::Berry { color, ripe: true }));
                }
            }
        }
    }

    fn aux(&self, st: &GridState, player: usize) -> Vec<(&'static str, Vec<f64>)> {
        vec![("READY_TO_SHOOT", vec![ready(st, player, BeamKind::Zap)])]
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
