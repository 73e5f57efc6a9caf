//! Boat Race: pairs of players row two-seat boats across a river in a
//! series of timed races.
//!
//! Each race opens with a partner-choice phase in which the barrier row in
//! front of the boats is closed. When it opens, a player who steps onto a
//! seat is locked in place until the boat reaches the far bank. Players who
//! have not reached the far bank when the race ends are disqualified for the
//! rest of the episode. Survivors are returned to the start bank for the
//! next race.

use std::any::Any;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    ActionKind, ActionSet, CellTags, CustomAction, Event, EventKind, GridState, Payload, Pos,
    Resource, Rules, Stream, Terrain, FOREVER,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoatParams {
    pub races: u32,
    pub choice_steps: u64,
    pub race_steps: u64,
    /// Steps per cell when both rowers paddle.
    pub paddle_period: u32,
    /// A paddle counts as current for this many steps.
    pub paddle_memory: u64,
    pub flail_prob: f64,
    pub paddler_penalty: f64,
    pub apple_reward: f64,
}

impl BoatParams {
    pub fn episode_steps(&self) -> u64 {
        u64::from(self.races) * (self.choice_steps + self.race_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stroke {
    Paddle,
    Flail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowResult {
    pub moved: bool,
    pub penalties: [f64; 2],
}

/// One step of a two-seat boat.
///
/// `strokes` are the rowing actions taken this step, `last_paddle` the most
/// recent paddle step of each seat (this step included). `streak` counts
/// consecutive steps of joint paddling and drives the deterministic
/// one-cell-per-period motion.
pub fn boat_row_tick(
    now: u64,
    strokes: [Option<Stroke>; 2],
    last_paddle: [Option<u64>; 2],
    streak: &mut u32,
    p: &BoatParams,
    rng: &mut Stream,
) -> RowResult {
    let paddling = last_paddle.map(|t| t.is_some_and(|t| now - t < p.paddle_memory));
    let flailing = strokes.map(|s| s == Some(Stroke::Flail));
    let mut penalties = [0.0; 2];
    if flailing[0] || flailing[1] {
        *streak = 0;
        for k in 0..2 {
            if paddling[k] && !flailing[k] && flailing[1 - k] {
                penalties[k] = p.paddler_penalty;
            }
        }
        let moved = rng.gen_bool(p.flail_prob);
        return RowResult { moved, penalties };
    }
    if paddling[0] && paddling[1] {
        *streak += 1;
        let moved = *streak % p.paddle_period.max(1) == 0;
        return RowResult { moved, penalties };
    }
    *streak = 0;
    RowResult { moved: false, penalties }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boat {
    /// Seat cells at the start bank.
    pub home: [Pos; 2],
    /// Cells moved toward the far bank this race.
    pub progress: i32,
    pub riders: [Option<usize>; 2],
    pub finished: bool,
    streak: u32,
    strokes: [Option<Stroke>; 2],
    last_paddle: [Option<u64>; 2],
}

impl Boat {
    fn new(home: [Pos; 2]) -> Self {
        Boat {
            home,
            progress: 0,
            riders: [None, None],
            finished: false,
            streak: 0,
            strokes: [None, None],
            last_paddle: [None, None],
        }
    }

    fn reset(&mut self) {
        *self = Boat::new(self.home);
    }

    pub fn at_home(&self) -> bool {
        self.progress == 0 && !self.finished
    }

    pub fn full(&self) -> bool {
        self.riders.iter().all(Option::is_some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phase {
    pub race: u32,
    pub racing: bool,
}

#[derive(Debug)]
pub struct BoatRules {
    p: BoatParams,
    boats: Vec<Boat>,
    seat_of: Vec<Option<(usize, usize)>>,
    reached: Vec<bool>,
    apple_sites: Vec<Pos>,
    phase: Phase,
}

impl BoatRules {
    pub fn new(p: BoatParams) -> Self {
        BoatRules {
            p,
            boats: Vec::new(),
            seat_of: Vec::new(),
            reached: Vec::new(),
            apple_sites: Vec::new(),
            phase: Phase { race: 0, racing: false },
        }
    }

    pub fn params(&self) -> &BoatParams {
        &self.p
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn boats(&self) -> &[Boat] {
        &self.boats
    }

    /// (boat, seat) the player sits in.
    pub fn seat_of(&self, player: usize) -> Option<(usize, usize)> {
        self.seat_of[player]
    }

    /// Player reached the far bank in the current race.
    pub fn reached(&self, player: usize) -> bool {
        self.reached[player]
    }

    /// Seat cells that a player could board right now.
    pub fn open_seats(&self, st: &GridState) -> Vec<Pos> {
        if !self.phase.racing {
            return Vec::new();
        }
        self.boats
            .iter()
            .filter(|b| b.at_home())
            .flat_map(|b| b.home)
            .filter(|p| st.avatar_at(*p).is_none())
            .collect()
    }

    fn seat_cell(&self, p: Pos) -> Option<(usize, usize)> {
        self.boats.iter().enumerate().find_map(|(b, boat)| {
            boat.home.iter().position(|h| *h == p).map(|k| (b, k))
        })
    }

    fn start_race(&mut self, st: &mut GridState) {
        self.phase.racing = true;
        for &p in &self.apple_sites {
            st.set_resource(p, Some(Resource::Apple));
        }
        st.emit(Event::new(EventKind::RacePhaseChange, None).payload(Payload::Phase {
            race: self.phase.race,
            racing: true,
        }));
    }

    fn end_race(&mut self, st: &mut GridState) {
        for i in 0..st.num_players() {
            if !st.avatars[i].is_removed() && !self.reached[i] {
                st.remove(i, FOREVER);
                st.emit(Event::new(EventKind::Disqualified, None).on(i));
            }
        }
        for &p in &self.apple_sites {
            st.take_resource(p);
        }
        for b in &mut self.boats {
            b.reset();
        }
        self.seat_of.iter_mut().for_each(|s| *s = None);
        self.phase = Phase {
            race: self.phase.race + 1,
            racing: false,
        };
        if self.phase.race >= self.p.races {
            return;
        }
        // back to the start bank
        let survivors: Vec<usize> = (0..st.num_players())
            .filter(|&i| !st.avatars[i].is_removed())
            .collect();
        for &i in &survivors {
            st.remove(i, 0);
        }
        for &i in &survivors {
            if let Some(p) = st.free_respawn_cell() {
                st.place(i, p);
            } else {
                st.remove(i, FOREVER);
            }
        }
        self.reached.iter_mut().for_each(|r| *r = false);
        st.emit(Event::new(EventKind::RacePhaseChange, None).payload(Payload::Phase {
            race: self.phase.race,
            racing: false,
        }));
    }

    fn row(&mut self, st: &mut GridState, b: usize) {
        let now = st.step;
        let boat = &mut self.boats[b];
        if !boat.full() || boat.finished {
            boat.strokes = [None, None];
            return;
        }
        let out = boat_row_tick(
            now,
            boat.strokes,
            boat.last_paddle,
            &mut boat.streak,
            &self.p,
            &mut st.rng.dynamics,
        );
        boat.strokes = [None, None];
        let riders = boat.riders.map(|r| r.expect("full boat"));
        for k in 0..2 {
            if out.penalties[k] != 0.0 {
                st.emit(Event::new(EventKind::RowPenalty, riders[k]).reward(riders[k], out.penalties[k]));
            }
        }
        if !out.moved {
            return;
        }
        boat.progress += 1;
        st.emit(Event::new(EventKind::BoatMoved, None).payload(Payload::Kind(b as u8)));
        let ahead: Vec<Pos> = riders.iter().map(|&r| st.avatars[r].pos.step(crate::engine::Orientation::North)).collect();
        let landing = ahead.iter().any(|p| st.terrain(*p) != Terrain::Water);
        if !landing {
            for (k, &r) in riders.iter().enumerate() {
                st.move_avatar(r, ahead[k]);
            }
            return;
        }
        boat.finished = true;
        for (k, &r) in riders.iter().enumerate() {
            let target = if st.is_free(ahead[k]) {
                Some(ahead[k])
            } else {
                nearest_free_goal(st, ahead[k])
            };
            if let Some(t) = target {
                st.move_avatar(r, t);
            }
            self.seat_of[r] = None;
            self.reached[r] = true;
        }
    }
}

fn nearest_free_goal(st: &GridState, from: Pos) -> Option<Pos> {
    st.layout
        .positions_with(CellTags::GOAL)
        .into_iter()
        .filter(|p| st.is_free(*p))
        .min_by_key(|p| (p.manhattan(from), p.y, p.x))
}

impl Rules for BoatRules {
    fn action_set(&self, _role: &str) -> ActionSet {
        ActionSet::new([
            ("noop", ActionKind::Noop),
            ("paddle", ActionKind::Custom(CustomAction::Paddle)),
            ("flail", ActionKind::Custom(CustomAction::Flail)),
        ])
    }

    fn setup(&mut self, st: &mut GridState) -> Result<()> {
        let mut seats = st.layout.positions_with(CellTags::SEAT);
        seats.sort_by_key(|p| (p.y, p.x));
        if seats.is_empty() || seats.len() % 2 != 0 {
            return Err(Error::config("boat race map needs seats in adjacent pairs"));
        }
        self.boats = seats
            .chunks(2)
            .map(|c| {
                if c[0].y != c[1].y || c[1].x - c[0].x != 1 {
                    Err(Error::config("boat seats must come in horizontal pairs"))
                } else {
                    Ok(Boat::new([c[0], c[1]]))
                }
            })
            .collect::<Result<_>>()?;
        self.apple_sites = st.layout.positions_with(CellTags::GOAL | CellTags::SITE);
        self.seat_of = vec![None; st.num_players()];
        self.reached = vec![false; st.num_players()];
        self.phase = Phase { race: 0, racing: false };
        Ok(())
    }

    fn passable(&self, st: &GridState, player: usize, to: Pos) -> bool {
        if self.seat_of[player].is_some() {
            return false;
        }
        let cell = st.layout.cell(to);
        if cell.tags.contains(CellTags::BARRIER) {
            return self.phase.racing;
        }
        if cell.tags.contains(CellTags::SEAT) {
            return self.phase.racing
                && self.seat_cell(to).is_some_and(|(b, _)| self.boats[b].at_home());
        }
        cell.terrain.passable()
    }

    fn on_custom(&mut self, st: &mut GridState, actor: usize, action: CustomAction) {
        let Some((b, k)) = self.seat_of[actor] else { return };
        if !self.phase.racing {
            return;
        }
        let boat = &mut self.boats[b];
        match action {
            CustomAction::Paddle => {
                boat.strokes[k] = Some(Stroke::Paddle);
                boat.last_paddle[k] = Some(st.step);
            }
            CustomAction::Flail => boat.strokes[k] = Some(Stroke::Flail),
            CustomAction::Consume => {}
        }
    }

    fn on_contact(&mut self, st: &mut GridState, player: usize) {
        let pos = st.avatars[player].pos;
        if self.seat_of[player].is_none() && self.phase.racing {
            if let Some((b, k)) = self.seat_cell(pos) {
                if self.boats[b].at_home() && self.boats[b].riders[k].is_none() {
                    self.boats[b].riders[k] = Some(player);
                    self.seat_of[player] = Some((b, k));
                }
            }
        }
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
        if self.phase.racing {
            for b in 0..self.boats.len() {
                self.row(st, b);
            }
        }
        let cycle = self.p.choice_steps + self.p.race_steps;
        let into = (st.step + 1) % cycle;
        if into == self.p.choice_steps && !self.phase.racing {
            self.start_race(st);
        } else if into == 0 && self.phase.racing {
            self.end_race(st);
        }
    }

    fn finished(&self, _st: &GridState) -> bool {
        self.phase.race >= self.p.races
    }

    fn aux(&self, _st: &GridState, player: usize) -> Vec<(&'static str, Vec<f64>)> {
        vec![
            ("RACING", vec![f64::from(u8::from(self.phase.racing))]),
            ("SEATED", vec![f64::from(u8::from(self.seat_of[player].is_some()))]),
        ]
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
