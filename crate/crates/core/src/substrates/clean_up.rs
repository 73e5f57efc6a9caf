//! Clean Up: the river fills with pollution at a steady rate and the orchard
//! stops growing apples as the polluted fraction approaches a threshold.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{random_empty, ready, zap_remove, ZapParams};
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Contact, Event, EventKind,
    GridState, Pos, Resource, Rules, Terrain,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanUpParams {
    pub zap: ZapParams,
    pub clean_length: u8,
    pub clean_cooldown: u32,
    pub apple_reward: f64,
    /// New polluted river cells per step (fractional rates accumulate).
    pub pollution_rate: f64,
    /// Polluted fraction at which apple growth stops.
    pub threshold: f64,
    /// Per-cell apple growth probability on a clean river.
    pub base_growth: f64,
    /// Pollution capacity; the number of river cells when absent.
    #[serde(default)]
    pub capacity: Option<usize>,
}

/// Apple growth probability per empty orchard cell at a pollution level.
pub fn cleanup_growth_prob(pollution: f64, capacity: f64, p: &CleanUpParams) -> f64 {
    if capacity <= 0.0 {
        return 0.0;
    }
    let frac = pollution / capacity;
    if frac >= p.threshold {
        0.0
    } else {
        p.base_growth * (1.0 - frac / p.threshold)
    }
}

/// One step of the pollution balance: `rate` added, `cleaned` removed,
/// clamped to `[0, capacity]`. Returns the new level and the apple growth
/// probability at that level.
pub fn cleanup_tick(pollution: f64, cleaned: f64, capacity: f64, p: &CleanUpParams) -> (f64, f64) {
    let next = (pollution + p.pollution_rate - cleaned).clamp(0.0, capacity);
    (next, cleanup_growth_prob(next, capacity, p))
}

#[derive(Debug)]
pub struct CleanUpRules {
    p: CleanUpParams,
    river: Vec<Pos>,
    orchard: Vec<Pos>,
    capacity: f64,
    accumulator: f64,
}

impl CleanUpRules {
    pub fn new(p: CleanUpParams) -> Self {
        CleanUpRules {
            p,
            river: Vec::new(),
            orchard: Vec::new(),
            capacity: 0.0,
            accumulator: 0.0,
        }
    }

    pub fn params(&self) -> &CleanUpParams {
        &self.p
    }

    pub fn river(&self) -> &[Pos] {
        &self.river
    }

    pub fn orchard(&self) -> &[Pos] {
        &self.orchard
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn pollution(&self, st: &GridState) -> usize {
        self.river
            .iter()
            .filter(|p| matches!(st.resource(**p), Some(Resource::Pollution)))
            .count()
    }

    pub fn growth_prob(&self, st: &GridState) -> f64 {
        cleanup_growth_prob(self.pollution(st) as f64, self.capacity, &self.p)
    }

    fn clean_beam(&self) -> BeamSpec {
        BeamSpec {
            kind: BeamKind::Clean,
            length: self.p.clean_length,
            cooldown: self.p.clean_cooldown,
            hits_avatars: false,
            resources: Contact::Pass,
            penetrate: 0,
        }
    }
}

impl Rules for CleanUpRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        ActionSet::new([
            ("noop", ActionKind::Noop),
            self.p.zap.action(),
            ("clean", ActionKind::Beam(self.clean_beam())),
        ])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        let sites = st.layout.positions_with(CellTags::SITE);
        self.river = sites.iter().copied().filter(|p| st.terrain(*p) == Terrain::River).collect();
        self.orchard = sites.iter().copied().filter(|p| st.terrain(*p) == Terrain::Grass).collect();
        if self.river.is_empty() || self.orchard.is_empty() {
            return Err(Error::config("clean up map needs river and grass sites"));
        }
        self.capacity = self.p.capacity.unwrap_or(self.river.len()) as f64;
        for p in st.layout.positions_with(CellTags::SITE | CellTags::INIT) {
            let r = if st.terrain(p) == Terrain::River {
                Resource::Pollution
            } else {
                Resource::Apple
            };
            st.set_resource(p, Some(r));
        }
        self.accumulator = 0.0;
        Ok(())
    }

    fn beam_contact(&self, beam: &BeamSpec, r: &Resource) -> Contact {
        match (beam.kind, r) {
            (BeamKind::Clean, Resource::Pollution) => Contact::Hit,
            _ => beam.resources,
        }
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        match beam.kind {
            BeamKind::Zap => {
                if let Some(t) = hit.player {
                    zap_remove(st, actor, t, self.p.zap.removal);
                }
            }
            BeamKind::Clean => {
                for &p in &hit.resources {
                    st.take_resource(p);
                    st.emit(Event::new(EventKind::Cleaned, actor).at(p));
                }
            }
            _ => {}
        }
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        if matches!(st.resource(pos), Some(Resource::Apple)) {
            st.take_resource(pos);
            st.emit(
                Event::new(EventKind::ResourceEaten, player)
                    .at(pos)
                    .reward(player, self.p.apple_reward),
            );
        }
    }

    fn tick(&mut self, st: &mut GridState) {
        self.accumulator += self.p.pollution_rate;
        while self.accumulator >= 1.0 {
            match random_empty(st, &self.river, |r| &mut r.dynamics) {
                Some(p) => {
                    st.set_resource(p, Some(Resource::Pollution));
                    self.accumulator -= 1.0;
                }
                None => {
                    self.accumulator = self.accumulator.min(1.0);
                    break;
                }
            }
        }
        let prob = self.growth_prob(st);
        if prob <= 0.0 {
            return;
        }
        for &p in &self.orchard {
            if st.resource(p).is_none() && st.avatar_at(p).is_none() && st.rng.regrowth.gen_bool(prob) {
                st.set_resource(p, Some(Resource::Apple));
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
