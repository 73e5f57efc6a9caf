use serde::{Deserialize, Serialize};

/// The six movement actions every substrate shares, in their fixed order.
pub const MOVEMENT_ACTIONS: [&str; 6] = [
    "forward",
    "backward",
    "strafe_left",
    "strafe_right",
    "turn_left",
    "turn_right",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamKind {
    Zap,
    Clean,
    Plant(u8),
    Interact,
    Claim,
    Gift,
    Mine,
}

impl BeamKind {
    pub const SLOTS: usize = 7;

    /// Cooldown slot; all planting colours share one.
    pub fn slot(self) -> usize {
        match self {
            BeamKind::Zap => 0,
            BeamKind::Clean => 1,
            BeamKind::Plant(_) => 2,
            BeamKind::Interact => 3,
            BeamKind::Claim => 4,
            BeamKind::Gift => 5,
            BeamKind::Mine => 6,
        }
    }
}

/// What a beam does when its path crosses a resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    /// Beam continues through the cell.
    Pass,
    /// Beam stops without affecting the resource.
    Block,
    /// Beam affects the resource and stops (unless penetration remains).
    Hit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub kind: BeamKind,
    pub length: u8,
    pub cooldown: u32,
    /// Beam stops at (and reports) the first avatar on its path.
    pub hits_avatars: bool,
    /// Default contact with resources; substrates can refine it per resource.
    pub resources: Contact,
    /// Number of hit resources the beam passes through before stopping.
    pub penetrate: u8,
}

impl BeamSpec {
    /// Zap geometry used wherever a substrate does not say otherwise.
    pub fn zap(length: u8, cooldown: u32) -> Self {
        BeamSpec {
            kind: BeamKind::Zap,
            length,
            cooldown,
            hits_avatars: true,
            resources: Contact::Block,
            penetrate: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Forward,
    Backward,
    StrafeLeft,
    StrafeRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomAction {
    Consume,
    Paddle,
    Flail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ActionKind {
    Move(Move),
    TurnLeft,
    TurnRight,
    Noop,
    Beam(BeamSpec),
    Custom(CustomAction),
}

/// Index → action map for one role of one substrate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSet {
    names: Vec<&'static str>,
    kinds: Vec<ActionKind>,
}

impl ActionSet {
    /// Movement actions followed by the substrate's extra actions.
    pub fn new(extras: impl IntoIterator<Item = (&'static str, ActionKind)>) -> Self {
        let mut names: Vec<&'static str> = MOVEMENT_ACTIONS.to_vec();
        let mut kinds = vec![
            ActionKind::Move(Move::Forward),
            ActionKind::Move(Move::Backward),
            ActionKind::Move(Move::StrafeLeft),
            ActionKind::Move(Move::StrafeRight),
            ActionKind::TurnLeft,
            ActionKind::TurnRight,
        ];
        for (n, k) in extras {
            names.push(n);
            kinds.push(k);
        }
        ActionSet { names, kinds }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, index: usize) -> Option<ActionKind> {
        self.kinds.get(index).copied()
    }

    pub fn name(&self, index: usize) -> Option<&'static str> {
        self.names.get(index).copied()
    }

    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    /// The action that leaves the avatar where it is, if the set has one.
    pub fn stationary(&self) -> Option<usize> {
        self.index_of("noop")
    }

    pub fn beam(&self, name: &str) -> Option<BeamSpec> {
        match self.kind(self.index_of(name)?) {
            Some(ActionKind::Beam(b)) => Some(b),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn movement_comes_first_in_fixed_order() {
        let set = ActionSet::new([("noop", ActionKind::Noop), ("zap", ActionKind::Beam(BeamSpec::zap(3, 4)))]);
        assert_eq!(&set.names()[..6], &MOVEMENT_ACTIONS);
        assert_eq!(set.len(), 8);
        assert_eq!(set.stationary(), Some(6));
        assert_eq!(set.beam("zap").unwrap().length, 3);
        assert!(set.beam("noop").is_none());
    }
}
