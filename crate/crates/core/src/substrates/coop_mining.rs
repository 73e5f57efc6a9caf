//! Coop Mining: iron pays a lone miner, gold pays exactly two.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ready;
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Contact, Event, EventKind,
    GridState, MiningWindow, OreKind, Payload, Pos, Resource, Rules,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiningParams {
    pub mine_length: u8,
    pub mine_cooldown: u32,
    pub iron_reward: f64,
    pub gold_reward: f64,
    /// Steps after the first gold hit during which partners may join.
    pub gold_window: u64,
    /// Distinct miners a gold ore needs.
    pub gold_miners: usize,
    pub initial_iron: f64,
    pub initial_gold: f64,
    pub iron_spawn_prob: f64,
    pub gold_spawn_prob: f64,
}

/// Rewards for the hits `(step, player)` an ore received.
///
/// Iron pays the first miner. Gold pays every miner when exactly
/// `gold_miners` distinct players hit it within `gold_window` steps of the
/// first hit, and nobody otherwise.
pub fn mine_resolve(kind: OreKind, hits: &[(u64, usize)], p: &MiningParams) -> Vec<(usize, f64)> {
    let Some(&(t0, first)) = hits.first() else { return Vec::new() };
    match kind {
        OreKind::Iron => vec![(first, p.iron_reward)],
        OreKind::Gold => {
            let mut miners: Vec<usize> = Vec::new();
            for &(t, who) in hits {
                if t >= t0 && t - t0 <= p.gold_window && !miners.contains(&who) {
                    miners.push(who);
                }
            }
            if miners.len() == p.gold_miners {
                miners.into_iter().map(|m| (m, p.gold_reward)).collect()
            } else {
                Vec::new()
            }
        }
    }
}

#[derive(Debug)]
pub struct MiningRules {
    p: MiningParams,
    sites: Vec<Pos>,
}

impl MiningRules {
    pub fn new(p: MiningParams) -> Self {
        MiningRules { p, sites: Vec::new() }
    }

    pub fn params(&self) -> &MiningParams {
        &self.p
    }

    fn spawn(&self, st: &mut GridState, p: Pos, iron: f64, gold: f64) {
        let kind = if st.rng.regrowth.gen_bool(iron) {
            OreKind::Iron
        } else if st.rng.regrowth.gen_bool(gold) {
            OreKind::Gold
        } else {
            return;
        };
        st.set_resource(p, Some(Resource::Ore { kind, window: None }));
    }
}

impl Rules for MiningRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        let beam = BeamSpec {
            kind: BeamKind::Mine,
            length: self.p.mine_length,
            cooldown: self.p.mine_cooldown,
            hits_avatars: false,
            resources: Contact::Hit,
            penetrate: 0,
        };
        ActionSet::new([("noop", ActionKind::Noop), ("mine", ActionKind::Beam(beam))])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.sites = st.layout.positions_with(CellTags::SITE);
        for i in 0..self.sites.len() {
            let p = self.sites[i];
            if st.avatar_at(p).is_none() {
                self.spawn(st, p, self.p.initial_iron, self.p.initial_gold);
            }
        }
        Ok(())
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        if beam.kind != BeamKind::Mine {
            return;
        }
        let Some(&cell) = hit.resources.first() else { return };
        let now = st.step;
        let is_iron = matches!(st.resource(cell), Some(Resource::Ore { kind: OreKind::Iron, .. }));
        if is_iron {
            st.take_resource(cell);
            for (who, r) in mine_resolve(OreKind::Iron, &[(now, actor)], &self.p) {
                st.emit(
                    Event::new(EventKind::Mined, who)
                        .at(cell)
                        .payload(Payload::Kind(0))
                        .reward(who, r),
                );
            }
            return;
        }
        if let Some(Resource::Ore { kind: OreKind::Gold, window }) = st.resource_mut(cell) {
            match window {
                None => {
                    *window = Some(MiningWindow {
                        opened_at: now,
                        miners: vec![actor],
                    })
                }
                Some(w) => {
                    if now - w.opened_at <= self.p.gold_window && !w.miners.contains(&actor) {
                        w.miners.push(actor);
                    }
                }
            }
        }
    }

    fn tick(&mut self, st: &mut GridState) {
        let now = st.step;
        for i in 0..self.sites.len() {
            let p = self.sites[i];
            match st.resource(p) {
                Some(Resource::Ore { kind: OreKind::Gold, window: Some(w) }) => {
                    if now - w.opened_at < self.p.gold_window {
                        continue;
                    }
                    let hits: Vec<(u64, usize)> = w.miners.iter().map(|&m| (w.opened_at, m)).collect();
                    let paid = mine_resolve(OreKind::Gold, &hits, &self.p);
                    if paid.is_empty() {
                        st.set_resource(p, Some(Resource::Ore { kind: OreKind::Gold, window: None }));
                        st.emit(Event::new(EventKind::MiningFailed, hits[0].1).at(p));
                    } else {
                        st.take_resource(p);
                        for (who, r) in paid {
                            st.emit(
                                Event::new(EventKind::Mined, who)
                                    .at(p)
                                    .payload(Payload::Kind(1))
                                    .reward(who, r),
                            );
                        }
                    }
                }
                None if st.avatar_at(p).is_none() => {
                    self.spawn(st, p, self.p.iron_spawn_prob, self.p.gold_spawn_prob);
                }
                _ => {}
            }
        }
    }

    fn aux(&self, st: &GridState, player: usize) -> Vec<(&'static str, Vec<f64>)> {
        vec![("READY_TO_MINE", vec![ready(st, player, BeamKind::Mine)])]
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
