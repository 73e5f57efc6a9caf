//! Goal behaviours: what a bot does while a goal is active.
//!
//! A goal reads the grid and the bot's own avatar and returns one action
//! index. Targets inside the observation window are preferred; when none is
//! visible the bot heads for the nearest one anywhere on the map.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::nav::{self, in_line, move_action, route_avoiding, turn_action, visible};
use crate::engine::{
    ActionSet, BeamKind, CellTags, GridState, OreKind, Orientation, Pos, Resource, Rules, Stream,
    Terrain,
};
use crate::error::{Error, Result};
use crate::substrates::boat_race::BoatRules;
use crate::substrates::commons::CommonsRules;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinTarget {
    Own,
    Other,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke {
    Paddle,
    Flail,
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OreTarget {
    Iron,
    Gold,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Noop,
    Random,
    Wander,
    /// Gather `min` of resource `kind`, then seek an interaction partner.
    Play { kind: u8, min: u32 },
    EatApples { sustainable: bool },
    CleanRiver,
    Zap,
    Coins(CoinTarget),
    Boat(Stroke),
    Mine(OreTarget),
    Forage,
    Gift,
    Consume,
    Claim { steal: bool },
    Farm { color: u8 },
    Mushrooms(Vec<u8>),
    Flee,
}

/// Default inventory a collector gathers before looking for a partner.
pub const DEFAULT_PLAY_MIN: u32 = 5;

const PLANT_NAMES: [&str; 3] = ["plant_red", "plant_green", "plant_blue"];

impl FromStr for Goal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let bad = || Error::config(format!("bad goal `{s}`"));
        let num = |i: usize| -> Result<u32> { args.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let goal = match (head, args.len()) {
            ("noop", 0) => Goal::Noop,
            ("random", 0) => Goal::Random,
            ("wander", 0) => Goal::Wander,
            ("play", 1) => Goal::Play { kind: num(0)? as u8, min: DEFAULT_PLAY_MIN },
            ("play", 2) => Goal::Play { kind: num(0)? as u8, min: num(1)? },
            ("eat_apples", 0) => Goal::EatApples { sustainable: false },
            ("eat_apples", 1) if args[0] == "sustainable" => Goal::EatApples { sustainable: true },
            ("clean_river", 0) => Goal::CleanRiver,
            ("zap", 0) => Goal::Zap,
            ("coins", 1) => Goal::Coins(match args[0] {
                "own" => CoinTarget::Own,
                "other" => CoinTarget::Other,
                "any" => CoinTarget::Any,
                _ => return Err(bad()),
            }),
            ("boat", 1) => Goal::Boat(match args[0] {
                "paddle" => Stroke::Paddle,
                "flail" => Stroke::Flail,
                "rest" => Stroke::Rest,
                _ => return Err(bad()),
            }),
            ("mine", 1) => Goal::Mine(match args[0] {
                "iron" => OreTarget::Iron,
                "gold" => OreTarget::Gold,
                "any" => OreTarget::Any,
                _ => return Err(bad()),
            }),
            ("forage", 0) => Goal::Forage,
            ("gift", 0) => Goal::Gift,
            ("consume", 0) => Goal::Consume,
            ("claim", 0) => Goal::Claim { steal: false },
            ("claim", 1) if args[0] == "steal" => Goal::Claim { steal: true },
            ("farm", 1) => Goal::Farm { color: num(0)? as u8 },
            ("mushrooms", 1) => Goal::Mushrooms(
                args[0]
                    .split(',')
                    .map(|c| c.parse::<u8>().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            ("flee", 0) => Goal::Flee,
            _ => return Err(bad()),
        };
        Ok(goal)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Noop => write!(f, "noop"),
            Goal::Random => write!(f, "random"),
            Goal::Wander => write!(f, "wander"),
            Goal::Play { kind, min } => write!(f, "play:{kind}:{min}"),
            Goal::EatApples { sustainable: false } => write!(f, "eat_apples"),
            Goal::EatApples { sustainable: true } => write!(f, "eat_apples:sustainable"),
            Goal::CleanRiver => write!(f, "clean_river"),
            Goal::Zap => write!(f, "zap"),
            Goal::Coins(t) => write!(f, "coins:{}", match t {
                CoinTarget::Own => "own",
                CoinTarget::Other => "other",
                CoinTarget::Any => "any",
            }),
            Goal::Boat(s) => write!(f, "boat:{}", match s {
                Stroke::Paddle => "paddle",
                Stroke::Flail => "flail",
                Stroke::Rest => "rest",
            }),
            Goal::Mine(t) => write!(f, "mine:{}", match t {
                OreTarget::Iron => "iron",
                OreTarget::Gold => "gold",
                OreTarget::Any => "any",
            }),
            Goal::Forage => write!(f, "forage"),
            Goal::Gift => write!(f, "gift"),
            Goal::Consume => write!(f, "consume"),
            Goal::Claim { steal: false } => write!(f, "claim"),
            Goal::Claim { steal: true } => write!(f, "claim:steal"),
            Goal::Farm { color } => write!(f, "farm:{color}"),
            Goal::Mushrooms(c) => {
                let c: Vec<String> = c.iter().map(u8::to_string).collect();
                write!(f, "mushrooms:{}", c.join(","))
            }
            Goal::Flee => write!(f, "flee"),
        }
    }
}

/// What a goal sees when choosing an action.
pub struct Ctx<'a> {
    pub st: &'a GridState,
    pub rules: &'a dyn Rules,
    pub actions: &'a ActionSet,
    pub player: usize,
    pub rng: &'a mut Stream,
}

impl Ctx<'_> {
    fn me(&self) -> &crate::engine::AvatarState {
        &self.st.avatars[self.player]
    }

    fn action(&self, name: &str) -> Option<usize> {
        self.actions.index_of(name)
    }

    fn noop(&self) -> usize {
        self.actions.stationary().or_else(|| self.action("turn_left")).unwrap_or(0)
    }

    fn others(&self) -> Vec<Pos> {
        self.st
            .avatars
            .iter()
            .filter(|a| a.player != self.player && !a.is_removed())
            .map(|a| a.pos)
            .collect()
    }

    /// Cells anywhere on the map satisfying `f`.
    fn cells(&self, f: impl Fn(Pos, Option<&Resource>) -> bool) -> Vec<Pos> {
        (0..self.st.layout.len())
            .map(|i| self.st.layout.pos(i))
            .filter(|&p| f(p, self.st.resources[self.st.layout.index(p)].as_ref()))
            .collect()
    }

    fn prefer_visible(&self, targets: Vec<Pos>) -> [Vec<Pos>; 2] {
        let (seen, unseen): (Vec<Pos>, Vec<Pos>) =
            targets.into_iter().partition(|&p| visible(self.st, self.player, p));
        let mut all = seen.clone();
        all.extend(unseen);
        [seen, all]
    }

    /// Next move towards standing on one of `targets`.
    fn go(&self, targets: Vec<Pos>, avoid: &dyn Fn(Pos) -> bool) -> Option<usize> {
        for set in self.prefer_visible(targets) {
            if set.is_empty() {
                continue;
            }
            let hit = |p: Pos| set.contains(&p);
            let r = route_avoiding(self.st, self.rules, self.player, hit, avoid)
                .or_else(|| route_avoiding(self.st, self.rules, self.player, hit, |_| false));
            if let Some(r) = r {
                return Some(match r.first {
                    Some(dir) => move_action(self.actions, self.me().orientation, dir),
                    None => self.noop(),
                });
            }
        }
        None
    }

    /// Like [`Ctx::go`] but never steps on an avoided cell.
    fn go_strict(&self, targets: Vec<Pos>, avoid: &dyn Fn(Pos) -> bool) -> Option<usize> {
        for set in self.prefer_visible(targets) {
            let hit = |p: Pos| set.contains(&p);
            if let Some(r) = route_avoiding(self.st, self.rules, self.player, hit, avoid) {
                return Some(match r.first {
                    Some(dir) => move_action(self.actions, self.me().orientation, dir),
                    None => self.noop(),
                });
            }
        }
        None
    }

    /// Fires beam `name` at one of `targets`: shoots when one lies ahead in
    /// range, turns when one lies to the side, otherwise walks to a cell
    /// from which one is in range.
    fn aim(&self, name: &str, targets: Vec<Pos>) -> Option<usize> {
        let fire = self.action(name)?;
        let range = i32::from(self.actions.beam(name)?.length);
        for set in self.prefer_visible(targets) {
            if set.is_empty() {
                continue;
            }
            let me = self.me();
            let mut best: Option<(i32, Orientation)> = None;
            for &t in &set {
                if let Some((dir, d)) = in_line(self.st, me.pos, t) {
                    if d <= range && best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, dir));
                    }
                }
            }
            if let Some((_, dir)) = best {
                return Some(turn_action(self.actions, me.orientation, dir).unwrap_or(fire));
            }
            let st = self.st;
            let mut stand = vec![false; st.layout.len()];
            for &t in &set {
                for dir in Orientation::ALL {
                    for d in 1..=range {
                        let p = t.offset(dir, d);
                        if !st.in_bounds(p) || !st.terrain(p).passable() {
                            break;
                        }
                        stand[st.layout.index(p)] = true;
                    }
                }
            }
            let r = nav::route(st, self.rules, self.player, |p| stand[st.layout.index(p)]);
            if let Some(nav::Route { first: Some(dir), .. }) = r {
                return Some(move_action(self.actions, me.orientation, dir));
            }
        }
        None
    }

    fn wander(&mut self) -> usize {
        const CHOICES: [&str; 7] = [
            "forward",
            "forward",
            "forward",
            "strafe_left",
            "strafe_right",
            "turn_left",
            "turn_right",
        ];
        let ahead = self.me().pos.step(self.me().orientation);
        let blocked = !nav::walkable(self.st, self.rules, self.player, ahead);
        let name = if blocked {
            CHOICES[5 + self.rng.gen_range(0..2)]
        } else {
            CHOICES[self.rng.gen_range(0..CHOICES.len())]
        };
        self.action(name).unwrap_or(0)
    }

    fn ready(&self, kind: BeamKind) -> bool {
        self.st.step >= self.me().beam_ready_at[kind.slot()]
    }
}

fn apple_neighbors(st: &GridState, p: Pos, r2: i32) -> usize {
    let r = (f64::from(r2)).sqrt() as i32;
    let mut n = 0;
    for dy in -r..=r {
        for dx in -r..=r {
            let q = Pos::new(p.x + dx, p.y + dy);
            if q != p && p.dist2(q) <= r2 && matches!(st.resource(q), Some(Resource::Apple)) {
                n += 1;
            }
        }
    }
    n
}

/// One action for `goal`.
pub fn act(goal: &Goal, ctx: &mut Ctx<'_>) -> usize {
    if ctx.me().is_removed() {
        return ctx.noop();
    }
    let chosen = match goal {
        Goal::Noop => Some(ctx.noop()),
        Goal::Random => Some(ctx.rng.gen_range(0..ctx.actions.len())),
        Goal::Wander => None,
        Goal::Play { kind, min } => play(ctx, *kind, *min),
        Goal::EatApples { sustainable } => {
            let r2 = ctx
                .rules
                .as_any()
                .downcast_ref::<CommonsRules>()
                .map_or(4, |c| c.params().neighborhood_radius2);
            let st = ctx.st;
            let apples = ctx.cells(|p, r| {
                matches!(r, Some(Resource::Apple)) && (!sustainable || apple_neighbors(st, p, r2) >= 3)
            });
            ctx.go(apples, &|_| false)
        }
        Goal::CleanRiver => {
            let dirt = ctx.cells(|_, r| matches!(r, Some(Resource::Pollution)));
            ctx.aim("clean", dirt).or_else(|| {
                let st = ctx.st;
                let river = ctx.cells(|p, _| st.terrain(p) == Terrain::River);
                let bank: Vec<Pos> = ctx.cells(|p, _| {
                    st.terrain(p).passable() && Orientation::ALL.iter().any(|d| river.contains(&p.step(*d)))
                });
                ctx.go(bank, &|_| false)
            })
        }
        Goal::Zap => {
            let others = ctx.others();
            ctx.aim("zap", others)
        }
        Goal::Coins(t) => {
            let me = ctx.player as u8;
            let wanted = |c: u8| match t {
                CoinTarget::Own => c == me,
                CoinTarget::Other => c != me,
                CoinTarget::Any => true,
            };
            let st = ctx.st;
            let coins = ctx.cells(|_, r| matches!(r, Some(Resource::Coin { color }) if wanted(*color)));
            let avoid = |p: Pos| matches!(st.resource(p), Some(Resource::Coin { color }) if !wanted(*color));
            // never detour over an unwanted coin; wait instead
            Some(ctx.go_strict(coins, &avoid).unwrap_or_else(|| ctx.noop()))
        }
        Goal::Boat(stroke) => boat(ctx, *stroke),
        Goal::Mine(t) => {
            let ok = |k: OreKind| match t {
                OreTarget::Iron => k == OreKind::Iron,
                OreTarget::Gold => k == OreKind::Gold,
                OreTarget::Any => true,
            };
            let open_gold = ctx.cells(|_, r| {
                matches!(r, Some(Resource::Ore { kind: OreKind::Gold, window: Some(w) }) if !w.miners.is_empty())
            });
            let flashing = if ok(OreKind::Gold) {
                let mine = ctx.player;
                let st = ctx.st;
                open_gold
                    .into_iter()
                    .filter(|p| {
                        !matches!(st.resource(*p), Some(Resource::Ore { window: Some(w), .. }) if w.miners.contains(&mine))
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let ore = ctx.cells(|_, r| matches!(r, Some(Resource::Ore { kind, .. }) if ok(*kind)));
            ctx.aim("mine", flashing).or_else(|| ctx.aim("mine", ore))
        }
        Goal::Forage => {
            let tokens = ctx.cells(|_, r| matches!(r, Some(Resource::Token { .. })));
            ctx.go(tokens, &|_| false)
        }
        Goal::Gift => {
            if ctx.me().inventory.iter().sum::<u32>() == 0 {
                act_forage(ctx)
            } else {
                let others = ctx.others();
                ctx.aim("gift", others)
            }
        }
        Goal::Consume => ctx.action("consume"),
        Goal::Claim { steal } => {
            let me = ctx.player;
            let targets = ctx.cells(|_, r| match r {
                Some(Resource::Claimable { owner: None, .. }) => true,
                Some(Resource::Claimable { owner: Some(o), .. }) => *steal && *o != me,
                _ => false,
            });
            ctx.aim("claim", targets)
        }
        Goal::Farm { color } => {
            let ripe = ctx.cells(|_, r| matches!(r, Some(Resource::Berry { ripe: true, .. })));
            let [seen, _] = ctx.prefer_visible(ripe);
            let c = *color;
            ctx.go(seen, &|_| false).or_else(|| {
                let name = PLANT_NAMES.get(c as usize)?;
                let other = ctx.cells(|_, r| matches!(r, Some(Resource::Berry { color, ripe: false }) if *color != c));
                ctx.aim(name, other)
            })
        }
        Goal::Mushrooms(colors) => {
            let st = ctx.st;
            let shrooms = ctx.cells(|_, r| matches!(r, Some(Resource::Mushroom { color, .. }) if colors.contains(color)));
            let avoid = |p: Pos| matches!(st.resource(p), Some(Resource::Mushroom { color, .. }) if !colors.contains(color));
            ctx.go(shrooms, &avoid)
        }
        Goal::Flee => flee(ctx),
    };
    match chosen {
        Some(a) => a,
        None => ctx.wander(),
    }
}

fn act_forage(ctx: &mut Ctx<'_>) -> Option<usize> {
    let tokens = ctx.cells(|_, r| matches!(r, Some(Resource::Token { .. })));
    ctx.go(tokens, &|_| false)
}

fn play(ctx: &mut Ctx<'_>, kind: u8, min: u32) -> Option<usize> {
    let have = ctx.me().inventory.get(kind as usize).copied().unwrap_or(0);
    if have < min {
        let st = ctx.st;
        let mine = ctx.cells(|_, r| matches!(r, Some(Resource::Collectible { kind: k }) if *k == kind));
        let avoid = |p: Pos| matches!(st.resource(p), Some(Resource::Collectible { kind: k }) if *k != kind);
        if let Some(a) = ctx.go(mine, &avoid) {
            return Some(a);
        }
    }
    if !ctx.ready(BeamKind::Interact) {
        return None;
    }
    let others = ctx.others();
    ctx.aim("interact", others)
}

fn boat(ctx: &mut Ctx<'_>, stroke: Stroke) -> Option<usize> {
    let b = ctx.rules.as_any().downcast_ref::<BoatRules>()?;
    let me = ctx.player;
    if b.seat_of(me).is_some() {
        return match stroke {
            Stroke::Paddle => ctx.action("paddle"),
            Stroke::Flail => ctx.action("flail"),
            Stroke::Rest => Some(ctx.noop()),
        };
    }
    let st = ctx.st;
    if b.reached(me) {
        let apples = ctx.cells(|_, r| matches!(r, Some(Resource::Apple)));
        return ctx.go(apples, &|_| false).or(Some(ctx.noop()));
    }
    if b.phase().racing {
        let seats = b.open_seats(st);
        return ctx.go(seats, &|_| false);
    }
    let dock = ctx.cells(|p, _| {
        st.terrain(p).passable()
            && !st.layout.cell(p).tags.contains(CellTags::BARRIER)
            && Orientation::ALL.iter().any(|d| {
                let q = p.step(*d);
                st.in_bounds(q)
                    && (st.layout.cell(q).tags.contains(CellTags::BARRIER)
                        || st.layout.cell(q).tags.contains(CellTags::SEAT))
            })
    });
    ctx.go(dock, &|_| false).or(Some(ctx.noop()))
}

fn flee(ctx: &mut Ctx<'_>) -> Option<usize> {
    let others = ctx.others();
    if others.is_empty() {
        return Some(ctx.noop());
    }
    let me = ctx.me();
    let score = |p: Pos| others.iter().map(|o| o.manhattan(p)).min().unwrap_or(0);
    let mut best = (score(me.pos), None);
    for dir in Orientation::ALL {
        let q = me.pos.step(dir);
        if nav::walkable(ctx.st, ctx.rules, ctx.player, q) && score(q) > best.0 {
            best = (score(q), Some(dir));
        }
    }
    Some(match best.1 {
        Some(dir) => move_action(ctx.actions, me.orientation, dir),
        None => ctx.noop(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_names_round_trip() {
        for s in [
            "noop",
            "random",
            "play:1:5",
            "eat_apples:sustainable",
            "coins:own",
            "boat:flail",
            "mine:gold",
            "claim:steal",
            "farm:2",
            "mushrooms:0,2",
            "flee",
        ] {
            let g: Goal = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert_eq!("play:0".parse::<Goal>().unwrap(), Goal::Play { kind: 0, min: DEFAULT_PLAY_MIN });
        assert!("fly".parse::<Goal>().is_err());
        assert!("coins:mine".parse::<Goal>().is_err());
    }
}
