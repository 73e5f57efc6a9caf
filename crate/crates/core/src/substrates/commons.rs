//! Commons Harvest: apples regrow only next to other apples.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ready, zap_remove, ZapParams};
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Event, EventKind, GridState, Pos,
    Resource, Rules,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonsParams {
    pub zap: ZapParams,
    pub apple_reward: f64,
    /// Squared Euclidean radius of the regrowth neighbourhood.
    pub neighborhood_radius2: i32,
    /// Regrowth probability with 0, 1, 2 and 3 or more apples nearby.
    pub regrowth: [f64; 4],
}

/// Per-step regrowth probability of an empty apple cell.
pub fn commons_regrowth_prob(neighbor_apples: usize, table: &[f64; 4]) -> f64 {
    table[neighbor_apples.min(3)]
}

#[derive(Debug)]
pub struct CommonsRules {
    p: CommonsParams,
    sites: Vec<Pos>,
    /// Indices into `sites` within the regrowth radius, self excluded.
    neighbors: Vec<Vec<usize>>,
}

impl CommonsRules {
    pub fn new(p: CommonsParams) -> Self {
        CommonsRules {
            p,
            sites: Vec::new(),
            neighbors: Vec::new(),
        }
    }

    pub fn params(&self) -> &CommonsParams {
        &self.p
    }

    pub fn sites(&self) -> &[Pos] {
        &self.sites
    }

    pub fn apple_count(&self, st: &GridState) -> usize {
        self.sites
            .iter()
            .filter(|p| matches!(st.resource(**p), Some(Resource::Apple)))
            .count()
    }
}

impl Rules for CommonsRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        ActionSet::new([("noop", ActionKind::Noop), self.p.zap.action()])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        self.sites = st.layout.positions_with(CellTags::SITE);
        let r2 = self.p.neighborhood_radius2;
        self.neighbors = self
            .sites
            .iter()
            .map(|a| {
                self.sites
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| *b != a && a.dist2(**b) <= r2)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        for p in st.layout.positions_with(CellTags::SITE | CellTags::INIT) {
            st.set_resource(p, Some(Resource::Apple));
        }
        Ok(())
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        if beam.kind == BeamKind::Zap {
            if let Some(t) = hit.player {
                zap_remove(st, actor, t, self.p.zap.removal);
            }
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
        let has: Vec<bool> = self
            .sites
            .iter()
            .map(|p| matches!(st.resource(*p), Some(Resource::Apple)))
            .collect();
        for (i, &p) in self.sites.iter().enumerate() {
            if has[i] || st.resource(p).is_some() || st.avatar_at(p).is_some() {
                continue;
            }
            let n = self.neighbors[i].iter().filter(|&&j| has[j]).count();
            let prob = commons_regrowth_prob(n, &self.p.regrowth);
            if prob > 0.0 && st.rng.regrowth.gen_bool(prob) {
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
