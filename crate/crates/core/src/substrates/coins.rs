//! Coins: picking up a coin of the other player's colour costs them.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    ActionKind, ActionSet, CellTags, Event, EventKind, GridState, Payload, Pos, Resource, Rules,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinParams {
    pub collect_reward: f64,
    pub mismatch_penalty: f64,
    /// Chance that a coin site holds a coin at reset.
    pub initial_density: f64,
    /// Per-step chance that an empty coin site grows a coin.
    pub spawn_prob: f64,
}

/// (picker reward, coin owner's reward). Player `i` owns colour `i`.
pub fn coin_pickup(picker: usize, coin_color: u8, p: &CoinParams) -> (f64, f64) {
    if coin_color as usize == picker {
        (p.collect_reward, 0.0)
    } else {
        (p.collect_reward, p.mismatch_penalty)
    }
}

#[derive(Debug)]
pub struct CoinRules {
    p: CoinParams,
    sites: Vec<Pos>,
}

impl CoinRules {
    pub fn new(p: CoinParams) -> Self {
        CoinRules { p, sites: Vec::new() }
    }

    pub fn params(&self) -> &CoinParams {
        &self.p
    }

    fn new_coin(st: &mut GridState) -> Resource {
        let n = st.num_players().max(1);
        Resource::Coin {
            color: st.rng.regrowth.gen_range(0..n) as u8,
        }
    }
}

impl Rules for CoinRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        ActionSet::new([("noop", ActionKind::Noop)])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.sites = st.layout.positions_with(CellTags::SITE);
        for &p in &self.sites {
            if st.avatar_at(p).is_none() && st.rng.regrowth.gen_bool(self.p.initial_density) {
                let c = Self::new_coin(st);
                st.set_resource(p, Some(c));
            }
        }
        Ok(())
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        let Some(Resource::Coin { color }) = st.resource(pos).cloned() else { return };
        st.take_resource(pos);
        let (mine, theirs) = coin_pickup(player, color, &self.p);
        let owner = color as usize;
        let mut ev = Event::new(EventKind::CoinCollected, player)
            .at(pos)
            .payload(Payload::Coin {
                color,
                mismatched: owner != player,
            })
            .reward(player, mine);
        if owner != player && owner < st.num_players() {
            ev = ev.reward(owner, theirs);
        }
        st.emit(ev);
    }

    fn tick(&mut self, st: &mut GridState) {
        for i in 0..self.sites.len() {
            let p = self.sites[i];
            if st.resource(p).is_none()
                && st.avatar_at(p).is_none()
                && st.rng.regrowth.gen_bool(self.p.spawn_prob)
            {
                let c = Self::new_coin(st);
                st.set_resource(p, Some(c));
            }
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
