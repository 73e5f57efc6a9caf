//! ASCII map layouts.
//!
//! A map file has a `[legend]` block followed by a `[map]` block:
//!
//! ```text
//! # comment
//! [legend]
//! W = wall
//! . = floor
//! P = spawn
//! A = grass site init
//! [map]
//! WWWW
//! WPAW
//! WWWW
//! ```
//!
//! Each legend value is a terrain name (`floor`, `wall`, `water`, `grass`,
//! `river`, `spawn`) followed by zero or more tags:
//!
//! | tag       | meaning                                                   |
//! |-----------|-----------------------------------------------------------|
//! | `site`    | a resource may exist here (apple, berry, ore, coin, ...)  |
//! | `init`    | the resource is present at reset                          |
//! | `type=k`  | resource type or colour index `k`                         |
//! | `inner`   | spawn cell used only for the initial placement            |
//! | `seat`    | boat seat (Boat Race)                                     |
//! | `barrier` | closed during the partner-choice phase (Boat Race)        |
//! | `goal`    | far bank (Boat Race)                                      |
//! | `maze`    | area filled by the seeded maze generator (Territory)      |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::Pos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terrain {
    Floor,
    Wall,
    Water,
    Grass,
    River,
    Spawn,
}

impl Terrain {
    pub fn passable(self) -> bool {
        !matches!(self, Terrain::Wall | Terrain::Water)
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "floor" => Terrain::Floor,
            "wall" => Terrain::Wall,
            "water" => Terrain::Water,
            "grass" => Terrain::Grass,
            "river" => Terrain::River,
            "spawn" => Terrain::Spawn,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CellTags(u8);

impl CellTags {
    pub const SITE: CellTags = CellTags(1);
    pub const INIT: CellTags = CellTags(1 << 1);
    pub const INNER: CellTags = CellTags(1 << 2);
    pub const SEAT: CellTags = CellTags(1 << 3);
    pub const BARRIER: CellTags = CellTags(1 << 4);
    pub const GOAL: CellTags = CellTags(1 << 5);
    pub const MAZE: CellTags = CellTags(1 << 6);

    pub fn contains(self, other: CellTags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: CellTags) {
        self.0 |= other.0;
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "site" => Self::SITE,
            "init" => Self::INIT,
            "inner" => Self::INNER,
            "seat" => Self::SEAT,
            "barrier" => Self::BARRIER,
            "goal" => Self::GOAL,
            "maze" => Self::MAZE,
            _ => return None,
        })
    }
}

impl std::ops::BitOr for CellTags {
    type Output = CellTags;

    fn bitor(self, rhs: CellTags) -> CellTags {
        CellTags(self.0 | rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellInfo {
    pub terrain: Terrain,
    pub tags: CellTags,
    pub kind: u8,
}

/// The static part of a map: terrain and per-cell tags. Shared between all
/// episodes of a substrate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapLayout {
    pub name: String,
    pub width: i32,
    pub height: i32,
    cells: Vec<CellInfo>,
}

impl MapLayout {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Legend,
            Map,
        }
        let err = |line: usize, msg: String| Error::config(format!("map `{name}` line {line}: {msg}"));

        let mut section = Section::Preamble;
        let mut legend: BTreeMap<char, CellInfo> = BTreeMap::new();
        let mut rows: Vec<Vec<CellInfo>> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if section != Section::Map {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                match line {
                    "[legend]" => {
                        section = Section::Legend;
                        continue;
                    }
                    "[map]" => {
                        section = Section::Map;
                        continue;
                    }
                    _ => {}
                }
                if section == Section::Preamble {
                    return Err(err(line_no, format!("expected [legend], got `{line}`")));
                }
                let mut chars = line.chars();
                let symbol = chars.next().unwrap();
                let rest = chars.as_str().trim_start();
                let rest = rest
                    .strip_prefix('=')
                    .ok_or_else(|| err(line_no, "legend entries look like `X = terrain tags..`".into()))?;
                let mut words = rest.split_whitespace();
                let terrain_name = words
                    .next()
                    .ok_or_else(|| err(line_no, "missing terrain".into()))?;
                let terrain = Terrain::parse(terrain_name)
                    .ok_or_else(|| err(line_no, format!("unknown terrain `{terrain_name}`")))?;
                let mut info = CellInfo {
                    terrain,
                    tags: CellTags::default(),
                    kind: 0,
                };
                for w in words {
                    if let Some(k) = w.strip_prefix("type=") {
                        info.kind = k
                            .parse()
                            .map_err(|_| err(line_no, format!("bad type index `{k}`")))?;
                    } else {
                        let tag = CellTags::parse(w)
                            .ok_or_else(|| err(line_no, format!("unknown tag `{w}`")))?;
                        info.tags.insert(tag);
                    }
                }
                if legend.insert(symbol, info).is_some() {
                    return Err(err(line_no, format!("duplicate legend symbol `{symbol}`")));
                }
            } else {
                let line = raw.trim_end();
                if line.is_empty() {
                    continue;
                }
                let row = line
                    .chars()
                    .map(|c| {
                        legend
                            .get(&c)
                            .copied()
                            .ok_or_else(|| err(line_no, format!("symbol `{c}` not in legend")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }

        let height = rows.len();
        if height == 0 {
            return Err(Error::config(format!("map `{name}` has no rows")));
        }
        let width = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::config(format!(
                "map `{name}`: row {bad} has {} cells, expected {width}",
                rows[bad].len()
            )));
        }
        Ok(MapLayout {
            name: name.to_string(),
            width: width as i32,
            height: height as i32,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn index(&self, p: Pos) -> usize {
        debug_assert!(self.in_bounds(p));
        (p.y * self.width + p.x) as usize
    }

    pub fn pos(&self, index: usize) -> Pos {
        let i = index as i32;
        Pos::new(i % self.width, i / self.width)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, p: Pos) -> CellInfo {
        self.cells[self.index(p)]
    }

    pub fn cell_at(&self, index: usize) -> CellInfo {
        self.cells[index]
    }

    pub fn set_cell(&mut self, p: Pos, info: CellInfo) {
        let i = self.index(p);
        self.cells[i] = info;
    }

    pub fn cells(&self) -> impl Iterator<Item = (Pos, CellInfo)> + '_ {
        self.cells.iter().enumerate().map(|(i, c)| (self.pos(i), *c))
    }

    pub fn positions_with(&self, tags: CellTags) -> Vec<Pos> {
        self.cells()
            .filter(|(_, c)| c.tags.contains(tags))
            .map(|(p, _)| p)
            .collect()
    }

    pub fn spawn_cells(&self) -> Vec<Pos> {
        self.cells()
            .filter(|(_, c)| c.terrain == Terrain::Spawn)
            .map(|(p, _)| p)
            .collect()
    }
}
