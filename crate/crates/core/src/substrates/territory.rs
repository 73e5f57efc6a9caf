//! Territory: claimable wall resources pay their owner once active.

use std::any::Any;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ready;
use crate::engine::{
    ActionKind, ActionSet, BeamHit, BeamKind, BeamSpec, CellInfo, CellTags, Contact, Event,
    EventKind, GridState, Pos, Resource, Rules, Stream, Terrain, FOREVER,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerritoryParams {
    pub zap_length: u8,
    pub zap_cooldown: u32,
    pub claim_length: u8,
    pub claim_cooldown: u32,
    /// Resources a claim beam passes through before stopping.
    pub claim_penetrate: u8,
    pub activation_steps: u64,
    pub payout_prob: f64,
    pub payout_reward: f64,
    /// Zaps that destroy a resource.
    pub zaps_to_destroy: u8,
    /// Fill `maze` cells with a seeded maze of resources at reset.
    #[serde(default)]
    pub maze: bool,
}

/// Sets `player` as owner; restarts the activation countdown when the owner
/// changes. Returns whether ownership changed.
pub fn territory_claim(r: &mut Resource, player: usize, now: u64) -> bool {
    match r {
        Resource::Claimable { owner, claimed_at, active, .. } if *owner != Some(player) => {
            *owner = Some(player);
            *claimed_at = now;
            *active = false;
            true
        }
        _ => false,
    }
}

/// One zap on a resource. Returns whether it is now destroyed.
pub fn territory_zap(r: &mut Resource, p: &TerritoryParams) -> bool {
    match r {
        Resource::Claimable { zaps, .. } => {
            *zaps = zaps.saturating_add(1);
            *zaps >= p.zaps_to_destroy
        }
        _ => false,
    }
}

/// Returns every resource owned by `player` to the unclaimed state.
pub fn territory_release(r: &mut Resource, player: usize) -> bool {
    match r {
        Resource::Claimable { owner, active, .. } if *owner == Some(player) => {
            *owner = None;
            *active = false;
            true
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerritoryTick {
    Activated { owner: usize },
    Payout { owner: usize },
}

/// Activation and payout for one claimed resource at step `now`.
pub fn territory_tick(r: &mut Resource, now: u64, p: &TerritoryParams, rng: &mut Stream) -> Option<TerritoryTick> {
    let Resource::Claimable { owner: Some(o), claimed_at, active, .. } = r else { return None };
    let o = *o;
    if !*active {
        if now >= *claimed_at + p.activation_steps {
            *active = true;
            return Some(TerritoryTick::Activated { owner: o });
        }
        return None;
    }
    rng.gen_bool(p.payout_prob).then_some(TerritoryTick::Payout { owner: o })
}

fn claimable() -> Resource {
    Resource::Claimable {
        owner: None,
        claimed_at: 0,
        active: false,
        zaps: 0,
    }
}

/// Randomised depth-first maze over the bounding box of `cells`. Returns the
/// cells that stay solid.
pub fn generate_maze(cells: &[Pos], rng: &mut Stream) -> Vec<Pos> {
    let Some(x0) = cells.iter().map(|p| p.x).min() else { return Vec::new() };
    let y0 = cells.iter().map(|p| p.y).min().unwrap_or(0);
    let x1 = cells.iter().map(|p| p.x).max().unwrap_or(0);
    let y1 = cells.iter().map(|p| p.y).max().unwrap_or(0);
    let w = (x1 - x0 + 1) as usize;
    let h = (y1 - y0 + 1) as usize;
    let mut open = vec![false; w * h];
    let at = |x: i32, y: i32| (y as usize) * w + x as usize;
    let rooms_x = (w as i32 - 1) / 2;
    let rooms_y = (h as i32 - 1) / 2;
    if rooms_x > 0 && rooms_y > 0 {
        let mut seen = vec![false; (rooms_x * rooms_y) as usize];
        let mut stack = vec![(0i32, 0i32)];
        seen[0] = true;
        open[at(1, 1)] = true;
        while let Some(&(rx, ry)) = stack.last() {
            let mut next: Vec<(i32, i32)> = [(0, -1), (1, 0), (0, 1), (-1, 0)]
                .iter()
                .map(|(dx, dy)| (rx + dx, ry + dy))
                .filter(|&(nx, ny)| {
                    nx >= 0 && ny >= 0 && nx < rooms_x && ny < rooms_y && !seen[(ny * rooms_x + nx) as usize]
                })
                .collect();
            if next.is_empty() {
                stack.pop();
                continue;
            }
            next.shuffle(rng);
            let (nx, ny) = next[0];
            seen[(ny * rooms_x + nx) as usize] = true;
            open[at(2 * nx + 1, 2 * ny + 1)] = true;
            open[at(rx + nx + 1, ry + ny + 1)] = true;
            stack.push((nx, ny));
        }
        // one doorway in the middle of each side
        let mx = 2 * (rooms_x / 2) + 1;
        let my = 2 * (rooms_y / 2) + 1;
        open[at(mx, 0)] = true;
        open[at(mx, h as i32 - 1)] = true;
        open[at(0, my)] = true;
        open[at(w as i32 - 1, my)] = true;
    }
    cells
        .iter()
        .copied()
        .filter(|p| !open[at(p.x - x0, p.y - y0)])
        .collect()
}

#[derive(Debug)]
pub struct TerritoryRules {
    p: TerritoryParams,
    cells: Vec<Pos>,
}

impl TerritoryRules {
    pub fn new(p: TerritoryParams) -> Self {
        TerritoryRules { p, cells: Vec::new() }
    }

    pub fn params(&self) -> &TerritoryParams {
        &self.p
    }

    /// Cells that started with a resource this episode.
    pub fn resource_cells(&self) -> &[Pos] {
        &self.cells
    }

    fn claim(&self, st: &mut GridState, actor: usize, p: Pos) {
        let now = st.step;
        if let Some(r) = st.resource_mut(p) {
            if territory_claim(r, actor, now) {
                st.emit(Event::new(EventKind::Claimed, actor).at(p));
            }
        }
    }

    fn eliminate(&self, st: &mut GridState, actor: usize, target: usize) {
        st.emit(Event::new(EventKind::ZapHit, actor).on(target));
        st.remove(target, FOREVER);
        st.emit(Event::new(EventKind::Removed, actor).on(target));
        for &p in &self.cells {
            if let Some(r) = st.resource_mut(p) {
                territory_release(r, target);
            }
        }
    }
}

impl Rules for TerritoryRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        let mut zap = BeamSpec::zap(self.p.zap_length, self.p.zap_cooldown);
        zap.resources = Contact::Hit;
        let claim = BeamSpec {
            kind: BeamKind::Claim,
            length: self.p.claim_length,
            cooldown: self.p.claim_cooldown,
            hits_avatars: false,
            resources: Contact::Hit,
            penetrate: self.p.claim_penetrate,
        };
        ActionSet::new([
            ("noop", ActionKind::Noop),
            ("zap", ActionKind::Beam(zap)),
            ("claim", ActionKind::Beam(claim)),
        ])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        if self.p.maze {
            let maze = st.layout.positions_with(CellTags::MAZE);
            let solid = generate_maze(&maze, &mut st.rng.dynamics);
            let layout = std::sync::Arc::make_mut(&mut st.layout);
            for p in solid {
                let c = layout.cell(p);
                layout.set_cell(
                    p,
                    CellInfo {
                        terrain: c.terrain,
                        tags: c.tags | CellTags::SITE | CellTags::INIT,
                        kind: c.kind,
                    },
                );
            }
        }
        self.cells = st.layout.positions_with(CellTags::SITE | CellTags::INIT);
        self.cells.retain(|p| st.terrain(*p) != Terrain::Wall && st.avatar_at(*p).is_none());
        for &p in &self.cells {
            st.set_resource(p, Some(claimable()));
        }
        Ok(())
    }

    fn on_beam(&mut self, st: &mut GridState, actor: usize, beam: &BeamSpec, hit: &BeamHit) {
        match beam.kind {
            BeamKind::Claim => {
                for &p in &hit.resources {
                    self.claim(st, actor, p);
                }
            }
            BeamKind::Zap => {
                if let Some(t) = hit.player {
                    self.eliminate(st, actor, t);
                }
                for &p in &hit.resources {
                    let destroyed = st.resource_mut(p).is_some_and(|r| territory_zap(r, &self.p));
                    if destroyed {
                        st.take_resource(p);
                        st.emit(Event::new(EventKind::ResourceDestroyed, actor).at(p));
                    }
                }
            }
            _ => {}
        }
    }

    fn on_bump(&mut self, st: &mut GridState, actor: usize, cell: Pos) {
        self.claim(st, actor, cell);
    }

    fn tick(&mut self, st: &mut GridState) {
        let now = st.step;
        for i in 0..self.cells.len() {
            let p = self.cells[i];
            let idx = st.layout.index(p);
            let Some(r) = st.resources[idx].as_mut() else { continue };
            match territory_tick(r, now, &self.p, &mut st.rng.regrowth) {
                Some(TerritoryTick::Activated { owner }) => {
                    st.emit(Event::new(EventKind::ClaimActivated, owner).at(p));
                }
                Some(TerritoryTick::Payout { owner }) => {
                    st.emit(
                        Event::new(EventKind::ClaimPayout, owner)
                            .at(p)
                            .reward(owner, self.p.payout_reward),
                    );
                }
                None => {}
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
