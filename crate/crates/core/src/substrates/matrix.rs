//! Matrix games in space: collect resources to shape a mixed strategy, then
//! tag a partner with the interaction beam to play it.

use std::any::Any;

use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellTags, Contact, Event, EventKind,
    GridState, Payload, Pos, Resource, Rules,
};
use crate::error::Result;
use crate::matrix::{assign_row_col, bilinear, inventory_to_strategy, MatrixGameConfig};

#[derive(Debug)]
pub struct MatrixRules {
    cfg: MatrixGameConfig,
    /// (due step, cell, kind) of collected resources waiting to reappear.
    pending: Vec<(u64, Pos, u8)>,
    interactions: u64,
}

impl MatrixRules {
    pub fn new(cfg: MatrixGameConfig) -> Self {
        MatrixRules {
            cfg,
            pending: Vec::new(),
            interactions: 0,
        }
    }

    pub fn config(&self) -> &MatrixGameConfig {
        &self.cfg
    }

    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    fn interact(&mut self, st: &mut GridState, zapper: usize, zappee: usize) {
        let (zr, er) = (st.avatars[zapper].role.clone(), st.avatars[zappee].role.clone());
        let Some((row, col)) = assign_row_col(zapper, zappee, &zr, &er, &self.cfg) else { return };
        let (Ok(v_row), Ok(v_col)) = (
            inventory_to_strategy(&st.avatars[row].inventory),
            inventory_to_strategy(&st.avatars[col].inventory),
        ) else {
            return;
        };
        let (r_row, r_col) = bilinear(&v_row, &v_col, &self.cfg);
        st.emit(
            Event::new(EventKind::InteractionResolved, zapper)
                .on(zappee)
                .payload(Payload::Interaction { row, col, v_row, v_col })
                .reward(row, r_row)
                .reward(col, r_col),
        );
        for p in [zapper, zappee] {
            st.avatars[p].inventory = self.cfg.initial_inventory.clone();
            st.remove_for(p, self.cfg.removal_duration);
            st.emit(Event::new(EventKind::Removed, zapper).on(p));
        }
        self.interactions += 1;
    }
}

impl Rules for MatrixRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        let beam = BeamSpec {
            kind: BeamKind::Interact,
            length: self.cfg.interact_length,
            cooldown: self.cfg.interact_cooldown,
            hits_avatars: true,
            resources: Contact::Pass,
            penetrate: 0,
        };
        ActionSet::new([("noop", ActionKind::Noop), ("interact", ActionKind::Beam(beam))])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        for p in st.layout.positions_with(CellTags::SITE | CellTags::INIT) {
            let kind = st.layout.cell(p).kind;
            if (kind as usize) < self.cfg.k && st.avatar_at(p).is_none() {
                st.set_resource(p, Some(Resource::Collectible { kind }));
            }
        }
        for a in &mut st.avatars {
            a.inventory = self.cfg.initial_inventory.clone();
        }
        Ok(())
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        if beam.kind != BeamKind::Interact {
            return;
        }
        if let Some(t) = hit.player {
            self.interact(st, actor, t);
        }
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        let Some(Resource::Collectible { kind }) = st.resource(pos).cloned() else { return };
        st.take_resource(pos);
        st.avatars[player].inventory[kind as usize] += 1;
        st.emit(Event::new(EventKind::ResourceCollected, player).at(pos).payload(Payload::Kind(kind)));
        self.pending.push((st.step + self.cfg.respawn_steps, pos, kind));
    }

    fn tick(&mut self, st: &mut GridState) {
        let now = st.step;
        self.pending.retain(|&(due, p, kind)| {
            if now < due || st.avatar_at(p).is_some() {
                return true;
            }
            if st.resource(p).is_none() {
                st.set_resource(p, Some(Resource::Collectible { kind }));
            }
            false
        });
    }

    fn finished(&self, _st: &GridState) -> bool {
        self.cfg.one_shot && self.interactions > 0
    }

    fn aux(&self, st: &GridState, player: usize) -> Vec<(&'static str, Vec<f64>)> {
        let inv = st.avatars[player].inventory.iter().map(|&x| f64::from(x)).collect();
        vec![("INVENTORY", inv)]
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
