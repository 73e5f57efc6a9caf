use std::sync::Arc;

use serde::Serialize;

use super::action::BeamKind;
use super::event::Event;
use super::geometry::{Orientation, Pos};
use super::map::{MapLayout, Terrain};
use super::rng::RngStreams;

/// Step value meaning "forever" for removal timers.
pub const FOREVER: u64 = u64::MAX;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OreKind {
    Iron,
    Gold,
}

/// A gold ore that has been hit once and is waiting for a partner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MiningWindow {
    pub opened_at: u64,
    /// Distinct miners in hit order; the first one opened the window.
    pub miners: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Apple,
    Berry { color: u8, ripe: bool },
    Mushroom { color: u8, spawned_at: u64 },
    Ore { kind: OreKind, window: Option<MiningWindow> },
    Token { level: u8 },
    Claimable { owner: Option<usize>, claimed_at: u64, active: bool, zaps: u8 },
    Coin { color: u8 },
    Pollution,
    /// Matrix-game resource of type `kind`.
    Collectible { kind: u8 },
}

impl Resource {
    pub fn blocks_movement(&self) -> bool {
        matches!(self, Resource::Claimable { .. } | Resource::Ore { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvatarState {
    pub player: usize,
    pub role: String,
    pub pos: Pos,
    pub orientation: Orientation,
    /// Frozen while `step < frozen_until`.
    pub frozen_until: Option<u64>,
    /// Off the grid while set; reappears on a spawn cell once `step` reaches it.
    pub removed_until: Option<u64>,
    pub inventory: Vec<u32>,
    /// Substrate-driven recolouring of the avatar sprite.
    pub tint: Option<Rgb>,
    /// Step at which each beam slot is ready again.
    pub beam_ready_at: [u64; BeamKind::SLOTS],
}

impl AvatarState {
    pub fn is_removed(&self) -> bool {
        self.removed_until.is_some()
    }

    pub fn is_frozen(&self, step: u64) -> bool {
        self.frozen_until.is_some_and(|t| step < t)
    }
}

/// Full simulation state of one episode.
#[derive(Debug, Clone)]
pub struct GridState {
    pub layout: Arc<MapLayout>,
    pub resources: Vec<Option<Resource>>,
    pub avatars: Vec<AvatarState>,
    occupancy: Vec<Option<u16>>,
    pub step: u64,
    pub rng: RngStreams,
    /// Events emitted so far in the step being processed.
    pub pending_events: Vec<Event>,
    /// Spawn cells in the seeded order used for placement.
    pub spawn_order: Vec<Pos>,
    /// Subset of `spawn_order` eligible for respawning.
    pub respawn_order: Vec<Pos>,
}

impl GridState {
    pub(crate) fn new(layout: Arc<MapLayout>, rng: RngStreams) -> Self {
        let n = layout.len();
        GridState {
            layout,
            resources: vec![None; n],
            avatars: Vec::new(),
            occupancy: vec![None; n],
            step: 0,
            rng,
            pending_events: Vec::new(),
            spawn_order: Vec::new(),
            respawn_order: Vec::new(),
        }
    }

    pub fn width(&self) -> i32 {
        self.layout.width
    }

    pub fn height(&self) -> i32 {
        self.layout.height
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        self.layout.in_bounds(p)
    }

    pub fn terrain(&self, p: Pos) -> Terrain {
        self.layout.cell(p).terrain
    }

    pub fn num_players(&self) -> usize {
        self.avatars.len()
    }

    pub fn resource(&self, p: Pos) -> Option<&Resource> {
        if !self.in_bounds(p) {
            return None;
        }
        self.resources[self.layout.index(p)].as_ref()
    }

    pub fn resource_mut(&mut self, p: Pos) -> Option<&mut Resource> {
        let i = self.layout.index(p);
        self.resources[i].as_mut()
    }

    pub fn set_resource(&mut self, p: Pos, r: Option<Resource>) {
        let i = self.layout.index(p);
        self.resources[i] = r;
    }

    pub fn take_resource(&mut self, p: Pos) -> Option<Resource> {
        let i = self.layout.index(p);
        self.resources[i].take()
    }

    pub fn avatar_at(&self, p: Pos) -> Option<usize> {
        if !self.in_bounds(p) {
            return None;
        }
        self.occupancy[self.layout.index(p)].map(usize::from)
    }

    /// Terrain and resources allow standing here; ignores avatars.
    pub fn walkable(&self, p: Pos) -> bool {
        self.in_bounds(p)
            && self.terrain(p).passable()
            && !self.resource(p).is_some_and(Resource::blocks_movement)
    }

    pub fn is_free(&self, p: Pos) -> bool {
        self.walkable(p) && self.avatar_at(p).is_none()
    }

    pub fn active_players(&self) -> impl Iterator<Item = usize> + '_ {
        self.avatars
            .iter()
            .filter(|a| !a.is_removed())
            .map(|a| a.player)
    }

    pub fn emit(&mut self, event: Event) {
        self.pending_events.push(event);
    }

    /// Puts an avatar on a cell. The cell must be free.
    pub fn place(&mut self, player: usize, p: Pos) {
        let i = self.layout.index(p);
        debug_assert!(self.occupancy[i].is_none());
        self.occupancy[i] = Some(player as u16);
        let a = &mut self.avatars[player];
        a.pos = p;
        a.removed_until = None;
    }

    pub fn move_avatar(&mut self, player: usize, to: Pos) {
        let from = self.avatars[player].pos;
        let fi = self.layout.index(from);
        if self.occupancy[fi] == Some(player as u16) {
            self.occupancy[fi] = None;
        }
        let ti = self.layout.index(to);
        debug_assert!(self.occupancy[ti].is_none());
        self.occupancy[ti] = Some(player as u16);
        self.avatars[player].pos = to;
    }

    /// Takes an avatar off the grid until `until` ([`FOREVER`] for good).
    pub fn remove(&mut self, player: usize, until: u64) {
        let a = &self.avatars[player];
        if !a.is_removed() {
            let i = self.layout.index(a.pos);
            if self.occupancy[i] == Some(player as u16) {
                self.occupancy[i] = None;
            }
        }
        let a = &mut self.avatars[player];
        a.removed_until = Some(until);
        a.frozen_until = None;
    }

    pub fn freeze(&mut self, player: usize, until: u64) {
        let a = &mut self.avatars[player];
        a.frozen_until = Some(a.frozen_until.map_or(until, |t| t.max(until)));
    }

    /// First free cell of `respawn_order`, if any.
    pub fn free_respawn_cell(&self) -> Option<Pos> {
        self.respawn_order.iter().copied().find(|p| self.is_free(*p))
    }

    /// Count of avatars on the grid plus removed ones; always the slot count.
    pub fn slot_count(&self) -> (usize, usize) {
        let removed = self.avatars.iter().filter(|a| a.is_removed()).count();
        (self.avatars.len() - removed, removed)
    }

    /// Occupancy grid agrees with avatar positions.
    pub fn occupancy_consistent(&self) -> bool {
        let mut seen = 0;
        for a in &self.avatars {
            if a.is_removed() {
                continue;
            }
            if self.occupancy[self.layout.index(a.pos)] != Some(a.player as u16) {
                return false;
            }
            seen += 1;
        }
        self.occupancy.iter().filter(|o| o.is_some()).count() == seen
    }
}
