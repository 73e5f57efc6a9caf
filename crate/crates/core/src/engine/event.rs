use serde::Serialize;

use super::geometry::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ZapHit,
    Frozen,
    Removed,
    Respawned,
    Sanctioned,
    ResourceEaten,
    ResourceCollected,
    Cleaned,
    Planted,
    InteractionResolved,
    GiftDelivered,
    TokensConsumed,
    Mined,
    MiningFailed,
    CoinCollected,
    MushroomEaten,
    RacePhaseChange,
    BoatMoved,
    RowPenalty,
    Disqualified,
    Claimed,
    ClaimActivated,
    ClaimPayout,
    ResourceDestroyed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Player(usize),
    Cell(Pos),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    None,
    /// Resource type or colour index.
    Kind(u8),
    Interaction {
        row: usize,
        col: usize,
        v_row: Vec<f64>,
        v_col: Vec<f64>,
    },
    Coin {
        color: u8,
        /// The coin matched the *other* player's colour.
        mismatched: bool,
    },
    Gift {
        level: u8,
        received: u32,
        received_level: u8,
    },
    Tokens(u32),
    Phase {
        race: u32,
        racing: bool,
    },
    Steps(u64),
}

/// Something that happened during a step.
///
/// Rewards are carried by events: the per-player reward vector returned by a
/// step is exactly the sum of `rewards` over the step's events.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub actor: Option<usize>,
    pub target: Option<Target>,
    pub payload: Payload,
    pub rewards: Vec<(usize, f64)>,
}

impl Event {
    pub fn new(kind: EventKind, actor: impl Into<Option<usize>>) -> Self {
        Event {
            kind,
            actor: actor.into(),
            target: None,
            payload: Payload::None,
            rewards: Vec::new(),
        }
    }

    pub fn target(mut self, t: Target) -> Self {
        self.target = Some(t);
        self
    }

    pub fn at(self, cell: Pos) -> Self {
        self.target(Target::Cell(cell))
    }

    pub fn on(self, player: usize) -> Self {
        self.target(Target::Player(player))
    }

    pub fn payload(mut self, p: Payload) -> Self {
        self.payload = p;
        self
    }

    pub fn reward(mut self, player: usize, amount: f64) -> Self {
        if amount != 0.0 {
            self.rewards.push((player, amount));
        }
        self
    }
}
