//! Externality Mushrooms: three colours whose reward lands on the eater,
//! on everyone, or on everyone but the eater.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::random_empty;
use crate::engine::{
    ActionKind, ActionSet, CellTags, Event, EventKind, GridState, Payload, Pos, Resource, Rules,
};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Share {
    Eater,
    All,
    Others,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regrowth {
    pub probability: f64,
    /// Colours whose consumption may trigger this regrowth.
    pub triggers: Vec<u8>,
}

/// Per-colour tables, indexed red, green, blue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MushroomParams {
    pub reward: Vec<f64>,
    pub share: Vec<Share>,
    pub digestion: Vec<u64>,
    pub spoil: Vec<u64>,
    pub regrowth: Vec<Regrowth>,
}

/// Reward vector from `eater` consuming a `color` mushroom among `n` players.
pub fn mushroom_consume(eater: usize, color: u8, n: usize, p: &MushroomParams) -> Vec<f64> {
    let c = color as usize;
    let total = p.reward[c];
    let mut out = vec![0.0; n];
    match p.share[c] {
        Share::Eater => out[eater] = total,
        Share::All => out.iter_mut().for_each(|r| *r = total / n as f64),
        Share::Others if n > 1 => {
            let each = total / (n - 1) as f64;
            for (i, r) in out.iter_mut().enumerate() {
                if i != eater {
                    *r = each;
                }
            }
        }
        Share::Others => {}
    }
    out
}

#[derive(Debug)]
pub struct MushroomRules {
    p: MushroomParams,
    sites: Vec<Pos>,
}

impl MushroomRules {
    pub fn new(p: MushroomParams) -> Self {
        MushroomRules { p, sites: Vec::new() }
    }

    pub fn params(&self) -> &MushroomParams {
        &self.p
    }

    pub fn sites(&self) -> &[Pos] {
        &self.sites
    }
}

impl Rules for MushroomRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        ActionSet::new([("noop", ActionKind::Noop)])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.sites = st.layout.positions_with(CellTags::SITE);
        for p in st.layout.positions_with(CellTags::SITE | CellTags::INIT) {
            let color = st.layout.cell(p).kind;
            st.set_resource(p, Some(Resource::Mushroom { color, spawned_at: 0 }));
        }
        Ok(())
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        let Some(Resource::Mushroom { color, .. }) = st.resource(pos).cloned() else { return };
        st.take_resource(pos);
        let rewards = mushroom_consume(player, color, st.num_players(), &self.p);
        let mut ev = Event::new(EventKind::MushroomEaten, player)
            .at(pos)
            .payload(Payload::Kind(color));
        for (i, r) in rewards.into_iter().enumerate() {
            ev = ev.reward(i, r);
        }
        st.emit(ev);
        st.freeze_for(player, self.p.digestion[color as usize]);

        let now = st.step;
        for (c, rule) in self.p.regrowth.iter().enumerate() {
            if !rule.triggers.contains(&color) || !st.rng.regrowth.gen_bool(rule.probability) {
                continue;
            }
            if let Some(p) = random_empty(st, &self.sites, |r| &mut r.regrowth) {
                st.set_resource(p, Some(Resource::Mushroom { color: c as u8, spawned_at: now }));
            }
        }
    }

    fn tick(&mut self, st: &mut GridState) {
        let now = st.step;
        for &p in &self.sites {
            if let Some(Resource::Mushroom { color, spawned_at }) = st.resource(p) {
                if now.saturating_sub(*spawned_at) >= self.p.spoil[*color as usize] {
                    st.take_resource(p);
                }
            }
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
