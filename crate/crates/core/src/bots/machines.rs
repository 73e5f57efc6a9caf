//! The small state machines behind the reciprocating and turn-taking bots.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Pure-strategy index a partner effectively played: argmax of its
/// strategy vector, ties to the lowest index.
pub fn classify_partner_play(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cooperate,
    Defect,
    Spite,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cooperate => "cooperate",
            Mode::Defect => "defect",
            Mode::Spite => "spite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrimState {
    pub mode: Mode,
    pub strikes: u32,
    pub k: u32,
}

impl GrimState {
    pub fn new(k: u32) -> Self {
        GrimState {
            mode: Mode::Cooperate,
            strikes: 0,
            k: k.max(1),
        }
    }
}

/// One observed partner play. Defection is absorbing once `k` strikes
/// accumulate; cooperation never removes a strike.
pub fn grim_update(mut s: GrimState, defected: bool) -> GrimState {
    if defected {
        s.strikes += 1;
        if s.strikes >= s.k {
            s.mode = Mode::Defect;
        }
    }
    s
}

/// A coins reciprocator: `threshold` mismatches inside any `window`-step
/// window start a punishment of `spite` spiteful steps then `defect`
/// defecting steps. A new trigger restarts the punishment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinsReciprocator {
    pub window: u64,
    pub threshold: usize,
    pub spite: u64,
    pub defect: u64,
    history: VecDeque<u64>,
    punished_at: Option<u64>,
}

impl CoinsReciprocator {
    pub fn new(window: u64, threshold: usize, spite: u64, defect: u64) -> Self {
        CoinsReciprocator {
            window,
            threshold: threshold.max(1),
            spite,
            defect,
            history: VecDeque::new(),
            punished_at: None,
        }
    }

    pub fn generous() -> Self {
        Self::new(150, 3, 0, 150)
    }

    pub fn harsh() -> Self {
        Self::new(100, 1, 0, 100)
    }

    pub fn generous_strong() -> Self {
        Self::new(150, 3, 75, 75)
    }

    pub fn harsh_strong() -> Self {
        Self::new(100, 1, 50, 50)
    }
}

/// Records `mismatches` partner mismatches seen at `step` and returns the
/// mode for that step.
pub fn coins_reciprocator_step(s: &mut CoinsReciprocator, mismatches: u32, step: u64) -> Mode {
    for _ in 0..mismatches {
        s.history.push_back(step);
    }
    while s.history.front().is_some_and(|&t| step - t >= s.window) {
        s.history.pop_front();
    }
    if s.history.len() >= s.threshold {
        s.history.clear();
        s.punished_at = Some(step);
    }
    match s.punished_at {
        Some(t) if step - t < s.spite => Mode::Spite,
        Some(t) if step - t < s.spite + s.defect => Mode::Defect,
        _ => Mode::Cooperate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanUpGoal {
    Clean,
    Eat,
}

/// Conditional cleaner: clean while at least `threshold` others clean; a
/// nice bot also cleans unconditionally for its first `nice_steps` steps.
pub fn cleanup_conditional_step(cleaners: usize, threshold: usize, nice: bool, step: u64, nice_steps: u64) -> CleanUpGoal {
    if (nice && step < nice_steps) || cleaners >= threshold {
        CleanUpGoal::Clean
    } else {
        CleanUpGoal::Eat
    }
}

/// Alternates every `period` steps, starting with cleaning when
/// `clean_first`.
pub fn turn_taker_step(step: u64, period: u64, clean_first: bool) -> CleanUpGoal {
    let first_half = (step / period.max(1)) % 2 == 0;
    if first_half == clean_first {
        CleanUpGoal::Clean
    } else {
        CleanUpGoal::Eat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(classify_partner_play(&[0.8, 0.2]), 0);
        assert_eq!(classify_partner_play(&[0.5, 0.5]), 0);
        assert_eq!(classify_partner_play(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn two_strikes() {
        let s = grim_update(GrimState::new(2), true);
        assert_eq!(s.mode, Mode::Cooperate);
        let s = grim_update(s, true);
        assert_eq!(s.mode, Mode::Defect);
        let mut s = GrimState::new(1);
        for _ in 0..10 {
            s = grim_update(s, false);
        }
        assert_eq!(s.mode, Mode::Cooperate);
    }

    #[test]
    fn turn_taking() {
        assert_eq!(turn_taker_step(0, 200, true), CleanUpGoal::Clean);
        assert_eq!(turn_taker_step(200, 200, true), CleanUpGoal::Eat);
        assert_eq!(turn_taker_step(399, 200, false), CleanUpGoal::Clean);
    }

    #[test]
    fn conditional_cleaning() {
        assert_eq!(cleanup_conditional_step(2, 2, false, 500, 200), CleanUpGoal::Clean);
        assert_eq!(cleanup_conditional_step(2, 3, false, 500, 200), CleanUpGoal::Eat);
        assert_eq!(cleanup_conditional_step(0, 2, true, 50, 200), CleanUpGoal::Clean);
    }
}
