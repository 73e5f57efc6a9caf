//! Grid simulation shared by every substrate.

pub mod action;
pub mod beam;
pub mod env;
pub mod event;
pub mod geometry;
pub mod map;
pub mod render;
pub mod rng;
pub mod state;

pub use action::{ActionKind, ActionSet, BeamKind, BeamSpec, Contact, CustomAction, Move};
pub use beam::{cast_beam, BeamHit};
pub use env::{Env, EpisodeSetup, Rules, StepOutcome, StreamHasher, Termination};
pub use event::{Event, EventKind, Payload, Target};
pub use geometry::{Orientation, Pos};
pub use map::{CellInfo, CellTags, MapLayout, Terrain};
pub use rng::{RngStreams, Stream};
pub use render::{Frame, Observation, Palette, OBS_SIZE};
pub use state::{AvatarState, GridState, MiningWindow, OreKind, Resource, Rgb, FOREVER};
