//! Event-condition-action scripts.
//!
//! A bot is an ordered list of rules. Each step the controller refreshes
//! its trackers from the previous step's events, then runs the goal of the
//! first rule whose conditions all hold. Bot files look like:
//!
//! ```toml
//! [bots.grim_k2]
//! description = "cooperates until defected on twice"
//! trackers = [{ kind = "grim", k = 2, defect = 1 }]
//! rules = [
//!     { when = [["mode", "==", "defect"]], goal = "play:1" },
//!     { goal = "play:0" },
//! ]
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::goals::{self, Ctx, Goal};
use super::machines::{
    classify_partner_play, coins_reciprocator_step, grim_update, CoinsReciprocator, GrimState, Mode,
};
use super::nav::{in_line, visible};
use super::policy::Policy;
use crate::engine::{Env, EventKind, Payload, Stream, Target};
use crate::error::{Error, Result};
use crate::substrates::boat_race::BoatRules;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrackerSpec {
    /// Defect for good after `k` partner plays of strategy `defect`.
    Grim {
        k: u32,
        #[serde(default = "one")]
        defect: usize,
    },
    /// Punish the partner's mismatched coin pickups.
    CoinsReciprocator {
        window: u64,
        threshold: usize,
        #[serde(default)]
        spite: u64,
        defect: u64,
    },
    /// Distinct other players that cleaned within the last `window` steps.
    Cleaners { window: u64 },
    /// Redraw the `slip` flag with probability `p` after every interaction.
    Noise { p: f64 },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

/// A number a rule condition can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Step,
    StepMod(u64),
    Interactions,
    InteractionsMod(u64),
    /// Partner's last classified play, -1 before the first interaction.
    PartnerPlay,
    /// 0 cooperate, 1 defect, 2 spite.
    Mode,
    Cleaners,
    Inventory(usize),
    Holding,
    Slip,
    /// Resource kind another player was last seen collecting, -1 if none.
    Observed,
    /// 1 when another avatar stands straight ahead within this many cells.
    TargetAhead(i32),
    Seated,
    Racing,
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("bad signal `{s}`"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let n = || -> Result<u64> { arg.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        Ok(match (head, arg.is_some()) {
            ("step", false) => Signal::Step,
            ("step_mod", true) => Signal::StepMod(n()?.max(1)),
            ("interactions", false) => Signal::Interactions,
            ("interactions_mod", true) => Signal::InteractionsMod(n()?.max(1)),
            ("partner_play", false) => Signal::PartnerPlay,
            ("mode", false) => Signal::Mode,
            ("cleaners", false) => Signal::Cleaners,
            ("inventory", true) => Signal::Inventory(n()? as usize),
            ("holding", false) => Signal::Holding,
            ("slip", false) => Signal::Slip,
            ("observed", false) => Signal::Observed,
            ("target_ahead", false) => Signal::TargetAhead(3),
            ("target_ahead", true) => Signal::TargetAhead(n()? as i32),
            ("seated", false) => Signal::Seated,
            ("racing", false) => Signal::Racing,
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub signal: Signal,
    pub cmp: Cmp,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub when: Vec<Cond>,
    pub goal: Goal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleSpec {
    #[serde(default)]
    when: Vec<(String, Cmp, toml::Value)>,
    goal: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BotEntry {
    #[serde(default)]
    description: String,
    #[serde(default)]
    substrates: Vec<String>,
    #[serde(default)]
    trackers: Vec<TrackerSpec>,
    rules: Vec<RuleSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BotFile {
    bots: BTreeMap<String, BotEntry>,
}

/// A compiled bot script.
#[derive(Debug, Clone, PartialEq)]
pub struct BotSpec {
    pub name: String,
    pub description: String,
    /// Substrates the bot was written for; informational.
    pub substrates: Vec<String>,
    pub trackers: Vec<TrackerSpec>,
    pub rules: Vec<Rule>,
}

fn mode_value(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        toml::Value::Boolean(b) => Some(f64::from(u8::from(*b))),
        toml::Value::String(s) => match s.as_str() {
            "cooperate" => Some(0.0),
            "defect" => Some(1.0),
            "spite" => Some(2.0),
            _ => None,
        },
        _ => None,
    }
}

fn mode_code(m: Mode) -> f64 {
    match m {
        Mode::Cooperate => 0.0,
        Mode::Defect => 1.0,
        Mode::Spite => 2.0,
    }
}

impl BotSpec {
    /// Parses a bot file holding one or more `[bots.<name>]` tables.
    pub fn parse_file(source: &str, text: &str) -> Result<Vec<BotSpec>> {
        let file: BotFile = toml::from_str(text).map_err(|e| Error::config(format!("{source}: {e}")))?;
        file.bots
            .into_iter()
            .map(|(name, e)| {
                let ctx = |m: String| Error::config(format!("{source}: bot `{name}`: {m}"));
                if e.rules.is_empty() {
                    return Err(ctx("no rules".into()));
                }
                let mut rules = Vec::new();
                for r in e.rules {
                    let goal: Goal = r.goal.parse().map_err(|x: Error| ctx(x.to_string()))?;
                    let mut when = Vec::new();
                    for (sig, cmp, v) in r.when {
                        let signal: Signal = sig.parse().map_err(|x: Error| ctx(x.to_string()))?;
                        let value = mode_value(&v).ok_or_else(|| ctx(format!("bad value {v} for `{sig}`")))?;
                        when.push(Cond { signal, cmp, value });
                    }
                    rules.push(Rule { when, goal });
                }
                Ok(BotSpec {
                    name: name.clone(),
                    description: e.description,
                    substrates: e.substrates,
                    trackers: e.trackers,
                    rules,
                })
            })
            .collect()
    }

    /// A fresh controller for slot `player`, drawing noise from `rng`.
    pub fn controller(self: &Arc<Self>, player: usize, rng: Stream) -> PuppetController {
        PuppetController::new(Arc::clone(self), player, rng)
    }
}

/// Private state a controller keeps between steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Memory {
    pub interactions: u64,
    pub partner_play: Option<usize>,
    pub grim: Option<GrimState>,
    pub coins: Option<CoinsReciprocator>,
    pub coins_mode: Option<Mode>,
    /// (player, step) of recent cleaning events by others.
    pub cleaners: VecDeque<(usize, u64)>,
    pub cleaners_window: u64,
    pub slip: bool,
    pub noise: f64,
    pub observed: Option<u8>,
}

#[derive(Debug)]
pub struct PuppetController {
    spec: Arc<BotSpec>,
    player: usize,
    rng: Stream,
    memory: Memory,
    current: Option<usize>,
}

impl PuppetController {
    pub fn new(spec: Arc<BotSpec>, player: usize, rng: Stream) -> Self {
        let mut memory = Memory::default();
        for t in &spec.trackers {
            match *t {
                TrackerSpec::Grim { k, .. } => memory.grim = Some(GrimState::new(k)),
                TrackerSpec::CoinsReciprocator { window, threshold, spite, defect } => {
                    memory.coins = Some(CoinsReciprocator::new(window, threshold, spite, defect));
                }
                TrackerSpec::Cleaners { window } => memory.cleaners_window = window,
                TrackerSpec::Noise { p } => memory.noise = p,
            }
        }
        PuppetController { spec, player, rng, memory, current: None }
    }

    pub fn spec(&self) -> &BotSpec {
        &self.spec
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    /// Goal chosen on the most recent step.
    pub fn current_goal(&self) -> Option<&Goal> {
        self.current.map(|i| &self.spec.rules[i].goal)
    }

    fn defect_index(&self) -> usize {
        self.spec
            .trackers
            .iter()
            .find_map(|t| match t {
                TrackerSpec::Grim { defect, .. } => Some(*defect),
                _ => None,
            })
            .unwrap_or(1)
    }

    /// Updates trackers from the events of the step just taken.
    pub fn observe(&mut self, env: &Env) {
        let me = self.player;
        let st = env.state();
        let step = st.step;
        let mut mismatches = 0;
        for e in env.last_events() {
            match (&e.kind, &e.payload) {
                (EventKind::InteractionResolved, Payload::Interaction { row, col, v_row, v_col }) => {
                    let partner_v = if *row == me {
                        v_col
                    } else if *col == me {
                        v_row
                    } else {
                        continue;
                    };
                    let play = classify_partner_play(partner_v);
                    self.memory.interactions += 1;
                    self.memory.partner_play = Some(play);
                    if let Some(g) = self.memory.grim.take() {
                        self.memory.grim = Some(grim_update(g, play == self.defect_index()));
                    }
                    if self.memory.noise > 0.0 {
                        self.memory.slip = self.rng.gen_bool(self.memory.noise.min(1.0));
                    }
                }
                (EventKind::CoinCollected, Payload::Coin { color, mismatched: true }) => {
                    if e.actor != Some(me) && usize::from(*color) == me {
                        mismatches += 1;
                    }
                }
                (EventKind::Cleaned, _) => {
                    if let Some(a) = e.actor.filter(|&a| a != me) {
                        self.memory.cleaners.push_back((a, step));
                    }
                }
                (EventKind::ResourceCollected, Payload::Kind(k)) => {
                    let seen = match e.target {
                        Some(Target::Cell(p)) => visible(st, me, p),
                        _ => false,
                    };
                    if e.actor != Some(me) && seen {
                        self.memory.observed = Some(*k);
                    }
                }
                _ => {}
            }
        }
        if let Some(c) = self.memory.coins.as_mut() {
            self.memory.coins_mode = Some(coins_reciprocator_step(c, mismatches, step));
        }
        let w = self.memory.cleaners_window;
        while self.memory.cleaners.front().is_some_and(|&(_, t)| step.saturating_sub(t) >= w) {
            self.memory.cleaners.pop_front();
        }
    }

    fn signal(&self, env: &Env, s: Signal) -> f64 {
        let st = env.state();
        let me = &st.avatars[self.player];
        let m = &self.memory;
        match s {
            Signal::Step => st.step as f64,
            Signal::StepMod(n) => (st.step % n) as f64,
            Signal::Interactions => m.interactions as f64,
            Signal::InteractionsMod(n) => (m.interactions % n) as f64,
            Signal::PartnerPlay => m.partner_play.map_or(-1.0, |p| p as f64),
            Signal::Mode => {
                let grim = m.grim.as_ref().map(|g| g.mode);
                mode_code(m.coins_mode.or(grim).unwrap_or(Mode::Cooperate))
            }
            Signal::Cleaners => {
                let mut who: Vec<usize> = m.cleaners.iter().map(|&(p, _)| p).collect();
                who.sort_unstable();
                who.dedup();
                who.len() as f64
            }
            Signal::Inventory(k) => me.inventory.get(k).map_or(0.0, |&x| f64::from(x)),
            Signal::Holding => me.inventory.iter().map(|&x| f64::from(x)).sum(),
            Signal::Slip => f64::from(u8::from(m.slip)),
            Signal::Observed => m.observed.map_or(-1.0, f64::from),
            Signal::TargetAhead(len) => {
                let hit = !me.is_removed()
                    && st.avatars.iter().any(|o| {
                        o.player != self.player
                            && !o.is_removed()
                            && in_line(st, me.pos, o.pos).is_some_and(|(d, n)| d == me.orientation && n <= len)
                    });
                f64::from(u8::from(hit))
            }
            Signal::Seated => {
                let b = env.rules().as_any().downcast_ref::<BoatRules>();
                f64::from(u8::from(b.is_some_and(|b| b.seat_of(self.player).is_some())))
            }
            Signal::Racing => {
                let b = env.rules().as_any().downcast_ref::<BoatRules>();
                f64::from(u8::from(b.is_some_and(|b| b.phase().racing)))
            }
        }
    }

    /// Index of the first rule whose conditions hold.
    pub fn select(&self, env: &Env) -> Option<usize> {
        self.spec
            .rules
            .iter()
            .position(|r| r.when.iter().all(|c| c.cmp.holds(self.signal(env, c.signal), c.value)))
    }
}

impl Policy for PuppetController {
    fn name(&self) -> &str {
        &self.spec.name
    }

    fn act(&mut self, env: &Env, player: usize) -> usize {
        debug_assert_eq!(player, self.player);
        self.observe(env);
        self.current = self.select(env);
        let goal = self.current.map_or(Goal::Noop, |i| self.spec.rules[i].goal.clone());
        let mut ctx = Ctx {
            st: env.state(),
            rules: env.rules(),
            actions: env.action_set(player),
            player,
            rng: &mut self.rng,
        };
        goals::act(&goal, &mut ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rules_and_trackers() {
        let text = r#"
            [bots.grim_k2]
            trackers = [{ kind = "grim", k = 2 }]
            rules = [
                { when = [["mode", "==", "defect"]], goal = "play:1" },
                { goal = "play:0" },
            ]
        "#;
        let bots = BotSpec::parse_file("t", text).unwrap();
        assert_eq!(bots.len(), 1);
        let b = &bots[0];
        assert_eq!(b.rules[0].when[0].signal, Signal::Mode);
        assert_eq!(b.rules[0].when[0].value, 1.0);
        assert_eq!(b.trackers, vec![TrackerSpec::Grim { k: 2, defect: 1 }]);
    }

    #[test]
    fn rejects_unknown_goals_and_signals() {
        let bad_goal = "[bots.x]\nrules = [{ goal = \"dance\" }]";
        assert!(BotSpec::parse_file("t", bad_goal).is_err());
        let bad_signal = "[bots.x]\nrules = [{ when = [[\"mood\", \"==\", 1]], goal = \"noop\" }]";
        assert!(BotSpec::parse_file("t", bad_signal).is_err());
        let no_rules = "[bots.x]\nrules = []";
        assert!(BotSpec::parse_file("t", no_rules).is_err());
    }
}
