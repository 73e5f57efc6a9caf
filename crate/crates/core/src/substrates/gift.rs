//! Gift Refinements: gifting a token refines it into several tokens of the
//! next level for the receiver; consuming turns everything held into reward.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ready;
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Contact, CustomAction, Event,
    EventKind, GridState, Payload, Pos, Resource, Rules,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GiftParams {
    /// Number of refinement levels, rawest first.
    pub levels: u8,
    /// Per-level inventory cap.
    pub capacity: u32,
    /// Tokens the receiver gets when the gifted token can still be refined.
    pub multiplier: u32,
    pub gift_length: u8,
    pub gift_cooldown: u32,
    pub token_reward: f64,
    pub initial_density: f64,
    pub spawn_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GiftOutcome {
    /// Level of the token the giver lost.
    pub level: u8,
    pub received_level: u8,
    /// Tokens actually added to the receiver after the cap.
    pub received: u32,
    /// Tokens lost to the cap.
    pub overflow: u32,
}

/// Moves one gift from `giver` to `receiver`. `None` when the giver holds
/// nothing.
pub fn gift_resolve(giver: &mut [u32], receiver: &mut [u32], p: &GiftParams) -> Option<GiftOutcome> {
    let level = giver.iter().position(|&n| n > 0)?;
    giver[level] -= 1;
    let top = p.levels as usize - 1;
    let (to, amount) = if level < top {
        (level + 1, p.multiplier)
    } else {
        (top, 1)
    };
    let room = p.capacity.saturating_sub(receiver[to]);
    let received = amount.min(room);
    receiver[to] += received;
    Some(GiftOutcome {
        level: level as u8,
        received_level: to as u8,
        received,
        overflow: amount - received,
    })
}

/// Empties the inventory; returns the token count and its reward.
pub fn consume_tokens(inv: &mut [u32], p: &GiftParams) -> (u32, f64) {
    let n: u32 = inv.iter().sum();
    inv.iter_mut().for_each(|x| *x = 0);
    (n, f64::from(n) * p.token_reward)
}

#[derive(Debug)]
pub struct GiftRules {
    p: GiftParams,
    sites: Vec<Pos>,
}

impl GiftRules {
    pub fn new(p: GiftParams) -> Self {
        GiftRules { p, sites: Vec::new() }
    }

    pub fn params(&self) -> &GiftParams {
        &self.p
    }
}

impl Rules for GiftRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        let beam = BeamSpec {
            kind: BeamKind::Gift,
            length: self.p.gift_length,
            cooldown: self.p.gift_cooldown,
            hits_avatars: true,
            resources: Contact::Pass,
            penetrate: 0,
        };
        ActionSet::new([
            ("noop", ActionKind::Noop),
            ("gift", ActionKind::Beam(beam)),
            ("consume", ActionKind::Custom(CustomAction::Consume)),
        ])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.sites = st.layout.positions_with(CellTags::SITE);
        for a in &mut st.avatars {
            a.inventory = vec![0; self.p.levels as usize];
        }
        for i in 0..self.sites.len() {
            let p = self.sites[i];
            if st.avatar_at(p).is_none() && st.rng.regrowth.gen_bool(self.p.initial_density) {
                st.set_resource(p, Some(Resource::Token { level: 0 }));
            }
        }
        Ok(())
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        if beam.kind != BeamKind::Gift {
            return;
        }
        let Some(t) = hit.player else { return };
        let mut giver = std::mem::take(&mut st.avatars[actor].inventory);
        let out = gift_resolve(&mut giver, &mut st.avatars[t].inventory, &self.p);
        st.avatars[actor].inventory = giver;
        if let Some(o) = out {
            st.emit(Event::new(EventKind::GiftDelivered, actor).on(t).payload(Payload::Gift {
                level: o.level,
                received: o.received,
                received_level: o.received_level,
            }));
        }
    }

    fn on_custom(&mut self, st: &mut GridState, actor: usize, action: CustomAction) {
        if action != CustomAction::Consume {
            return;
        }
        let (n, reward) = consume_tokens(&mut st.avatars[actor].inventory, &self.p);
        if n > 0 {
            st.emit(
                Event::new(EventKind::TokensConsumed, actor)
                    .payload(Payload::Tokens(n))
                    .reward(actor, reward),
            );
        }
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        let Some(Resource::Token { level }) = st.resource(pos).cloned() else { return };
        let inv = &mut st.avatars[player].inventory;
        if inv[level as usize] >= self.p.capacity {
            return;
        }
        inv[level as usize] += 1;
        st.take_resource(pos);
        st.emit(Event::new(EventKind::ResourceCollected, player).at(pos).payload(Payload::Kind(level)));
    }

    fn tick(&mut self, st: &mut GridState) {
        for i in 0..self.sites.len() {
            let p = self.sites[i];
            if st.resource(p).is_none()
                && st.avatar_at(p).is_none()
                && st.rng.regrowth.gen_bool(self.p.spawn_prob)
            {
                st.set_resource(p, Some(Resource::Token { level: 0 }));
            }
        }
    }

    fn aux(&self, st: &GridState, player: usize) -> Vec<(&'static str, Vec<f64>)> {
        let inv = st.avatars[player].inventory.iter().map(|&x| f64::from(x)).collect();
        vec![
            ("INVENTORY", inv),
            ("READY_TO_GIFT", vec![ready(st, player, BeamKind::Gift)]),
        ]
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
