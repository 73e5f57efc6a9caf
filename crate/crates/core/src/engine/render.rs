//! Flat-colour sprite rendering.
//!
//! Every cell is an 8×8 tile: terrain fill, then resource, then avatar.
//! Avatars carry two "eyes" on the side they face. The egocentric view is
//! 11×11 tiles with the viewer in window row 9, column 5, rotated so the
//! viewer faces up; cells outside the map are painted [`Palette::void`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::{Orientation, Pos};
use super::map::Terrain;
use super::state::{GridState, OreKind, Resource, Rgb};

pub const SPRITE: usize = 8;
pub const WINDOW: usize = 11;
/// Egocentric frames are `OBS_SIZE × OBS_SIZE × 3`.
pub const OBS_SIZE: usize = SPRITE * WINDOW;
pub const AHEAD: i32 = 9;
pub const SIDE: i32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub rgb: Vec<u8>,
    pub aux: BTreeMap<String, Vec<f64>>,
}

/// Row-major RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Frame {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub void: Rgb,
    pub floor: Rgb,
    pub wall: Rgb,
    pub water: Rgb,
    pub grass: Rgb,
    pub river: Rgb,
    pub spawn: Rgb,
    pub apple: Rgb,
    pub berry: Vec<Rgb>,
    pub berry_unripe: Vec<Rgb>,
    pub mushroom: Vec<Rgb>,
    pub iron: Rgb,
    pub gold: Rgb,
    pub gold_flash: Rgb,
    pub token: Vec<Rgb>,
    pub claimable: Rgb,
    pub pollution: Rgb,
    pub collectible: Vec<Rgb>,
    pub players: Vec<Rgb>,
    pub eyes: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            void: [0, 0, 0],
            floor: [204, 196, 176],
            wall: [110, 110, 120],
            water: [60, 110, 200],
            grass: [150, 190, 110],
            river: [90, 150, 210],
            spawn: [214, 206, 186],
            apple: [40, 170, 60],
            berry: vec![[220, 40, 40], [40, 190, 60], [50, 70, 220]],
            berry_unripe: vec![[150, 100, 100], [100, 150, 110], [100, 110, 160]],
            mushroom: vec![[200, 30, 60], [30, 160, 90], [40, 90, 200]],
            iron: [140, 120, 110],
            gold: [200, 170, 40],
            gold_flash: [255, 230, 90],
            token: vec![[170, 140, 200], [130, 90, 190], [90, 40, 170]],
            claimable: [150, 140, 130],
            pollution: [100, 120, 60],
            collectible: vec![[230, 60, 60], [60, 200, 90], [60, 90, 230]],
            players: vec![
                [230, 120, 40],
                [60, 160, 230],
                [230, 70, 170],
                [120, 210, 60],
                [250, 200, 30],
                [150, 90, 230],
                [40, 200, 190],
                [200, 60, 60],
                [120, 120, 250],
                [250, 150, 150],
                [150, 230, 170],
                [190, 150, 70],
                [80, 140, 80],
                [230, 230, 120],
                [160, 60, 120],
                [60, 100, 140],
            ],
            eyes: [24, 24, 32],
        }
    }
}

fn pick(colors: &[Rgb], i: usize, fallback: Rgb) -> Rgb {
    if colors.is_empty() {
        fallback
    } else {
        colors[i % colors.len()]
    }
}

impl Palette {
    pub fn player(&self, i: usize) -> Rgb {
        pick(&self.players, i, [255, 255, 255])
    }

    fn terrain(&self, t: Terrain) -> Rgb {
        match t {
            Terrain::Floor => self.floor,
            Terrain::Wall => self.wall,
            Terrain::Water => self.water,
            Terrain::Grass => self.grass,
            Terrain::River => self.river,
            Terrain::Spawn => self.spawn,
        }
    }

    fn resource(&self, r: &Resource) -> Rgb {
        match r {
            Resource::Apple => self.apple,
            Resource::Berry { color, ripe: true } => pick(&self.berry, *color as usize, self.apple),
            Resource::Berry { color, ripe: false } => {
                pick(&self.berry_unripe, *color as usize, self.apple)
            }
            Resource::Mushroom { color, .. } => pick(&self.mushroom, *color as usize, self.apple),
            Resource::Ore { kind: OreKind::Iron, .. } => self.iron,
            Resource::Ore { kind: OreKind::Gold, window: None } => self.gold,
            Resource::Ore { kind: OreKind::Gold, window: Some(_) } => self.gold_flash,
            Resource::Token { level } => pick(&self.token, *level as usize, self.iron),
            Resource::Claimable { owner: None, .. } => self.claimable,
            Resource::Claimable { owner: Some(o), active, .. } => {
                let c = self.player(*o);
                if *active {
                    c
                } else {
                    blend(c, self.claimable)
                }
            }
            Resource::Coin { color } => self.player(*color as usize),
            Resource::Pollution => self.pollution,
            Resource::Collectible { kind } => pick(&self.collectible, *kind as usize, self.apple),
        }
    }
}

fn blend(a: Rgb, b: Rgb) -> Rgb {
    [
        ((u16::from(a[0]) + u16::from(b[0])) / 2) as u8,
        ((u16::from(a[1]) + u16::from(b[1])) / 2) as u8,
        ((u16::from(a[2]) + u16::from(b[2])) / 2) as u8,
    ]
}

type Tile = [[Rgb; SPRITE]; SPRITE];

/// Maps pixel (u, v) of a north-up tile to the pixel it lands on when the
/// tile is turned to face `f`.
fn rotate(u: usize, v: usize, f: Orientation) -> (usize, usize) {
    let (su, sv) = (2 * u as i32 - 7, 2 * v as i32 - 7);
    let (fx, fy) = f.delta();
    let (rx, ry) = f.right().delta();
    let wx = su * rx - sv * fx;
    let wy = su * ry - sv * fy;
    (((wx + 7) / 2) as usize, ((wy + 7) / 2) as usize)
}

/// World-oriented tile for cell `p`.
fn tile(st: &GridState, p: Pos, pal: &Palette) -> Tile {
    let cell = st.layout.cell(p);
    let mut t = [[pal.terrain(cell.terrain); SPRITE]; SPRITE];
    if let Some(r) = st.resource(p) {
        let c = pal.resource(r);
        let (lo, hi) = match r {
            Resource::Claimable { .. } => (0, SPRITE),
            Resource::Pollution => (1, SPRITE - 1),
            _ => (2, SPRITE - 2),
        };
        for row in t.iter_mut().take(hi).skip(lo) {
            for px in row.iter_mut().take(hi).skip(lo) {
                *px = c;
            }
        }
    }
    if let Some(i) = st.avatar_at(p) {
        let a = &st.avatars[i];
        let body = a.tint.unwrap_or_else(|| pal.player(i));
        for v in 1..SPRITE - 1 {
            for u in 1..SPRITE - 1 {
                let eye = v == 2 && (u == 2 || u == 5);
                let (x, y) = rotate(u, v, a.orientation);
                t[y][x] = if eye { pal.eyes } else { body };
            }
        }
    }
    t
}

fn blit(out: &mut [u8], stride: usize, x0: usize, y0: usize, t: &Tile, view: Orientation) {
    for v in 0..SPRITE {
        for u in 0..SPRITE {
            let (wx, wy) = rotate(u, v, view);
            let c = t[wy][wx];
            let i = ((y0 + v) * stride + x0 + u) * 3;
            out[i..i + 3].copy_from_slice(&c);
        }
    }
}

/// The 88×88×3 view of `player`. A removed player sees only void.
pub fn egocentric(st: &GridState, player: usize, pal: &Palette) -> Vec<u8> {
    let mut out = Vec::with_capacity(OBS_SIZE * OBS_SIZE * 3);
    for _ in 0..OBS_SIZE * OBS_SIZE {
        out.extend_from_slice(&pal.void);
    }
    let a = &st.avatars[player];
    if a.is_removed() {
        return out;
    }
    let f = a.orientation;
    let r = f.right();
    for row in 0..WINDOW {
        for col in 0..WINDOW {
            let ahead = AHEAD - row as i32;
            let side = col as i32 - SIDE;
            let p = a.pos.offset(f, ahead).offset(r, side);
            if !st.in_bounds(p) {
                continue;
            }
            let t = tile(st, p, pal);
            blit(&mut out, OBS_SIZE, col * SPRITE, row * SPRITE, &t, f);
        }
    }
    out
}

/// Whole map, north up, `width·8 × height·8`.
pub fn global(st: &GridState, pal: &Palette) -> Frame {
    let w = st.width() as usize * SPRITE;
    let h = st.height() as usize * SPRITE;
    let mut data = vec![0u8; w * h * 3];
    for y in 0..st.height() {
        for x in 0..st.width() {
            let p = Pos::new(x, y);
            let t = tile(st, p, pal);
            blit(&mut data, w, x as usize * SPRITE, y as usize * SPRITE, &t, Orientation::North);
        }
    }
    Frame { width: w, height: h, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_a_permutation() {
        for f in Orientation::ALL {
            let mut seen = [[false; SPRITE]; SPRITE];
            for v in 0..SPRITE {
                for u in 0..SPRITE {
                    let (x, y) = rotate(u, v, f);
                    assert!(!seen[y][x]);
                    seen[y][x] = true;
                }
            }
        }
        assert_eq!(rotate(3, 0, Orientation::North), (3, 0));
        // top edge of a north-up tile becomes the right edge when facing east
        assert_eq!(rotate(0, 0, Orientation::East), (7, 0));
    }

    #[test]
    fn palette_never_uses_void_colour() {
        let p = Palette::default();
        let mut all = vec![p.floor, p.wall, p.water, p.grass, p.river, p.spawn, p.apple];
        all.extend(p.berry.iter().chain(&p.berry_unripe).chain(&p.mushroom));
        all.extend([p.iron, p.gold, p.gold_flash, p.claimable, p.pollution, p.eyes]);
        all.extend(p.token.iter().chain(&p.collectible).chain(&p.players));
        assert!(all.iter().all(|c| *c != p.void));
    }
}
