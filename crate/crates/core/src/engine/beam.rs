use super::action::{BeamSpec, Contact};
use super::geometry::Pos;
use super::map::Terrain;
use super::state::{GridState, Resource};

/// What a beam touched on its way out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BeamHit {
    /// Every cell the beam entered, nearest first.
    pub path: Vec<Pos>,
    /// Resource cells the beam acted on, nearest first.
    pub resources: Vec<Pos>,
    /// First avatar on the path, if the beam affects avatars.
    pub player: Option<usize>,
    /// Cell that stopped the beam (wall or blocking resource).
    pub blocked_at: Option<Pos>,
}

impl BeamHit {
    pub fn is_empty(&self) -> bool {
        self.resources.is_empty() && self.player.is_none()
    }
}

/// Traces `beam` from `player` along its facing direction.
///
/// Walls stop the beam. Each resource is classified by `contact`; a `Hit`
/// consumes one unit of `beam.penetrate` and the beam carries on while any
/// remains. The first avatar met ends the beam when `hits_avatars` is set.
pub fn cast_beam(
    st: &GridState,
    player: usize,
    beam: &BeamSpec,
    contact: impl Fn(&Resource) -> Contact,
) -> BeamHit {
    let a = &st.avatars[player];
    let mut hit = BeamHit::default();
    let mut pierce = beam.penetrate;
    for d in 1..=i32::from(beam.length) {
        let p = a.pos.offset(a.orientation, d);
        if !st.in_bounds(p) || st.terrain(p) == Terrain::Wall {
            hit.blocked_at = st.in_bounds(p).then_some(p);
            break;
        }
        hit.path.push(p);
        if beam.hits_avatars {
            if let Some(other) = st.avatar_at(p) {
                hit.player = Some(other);
                break;
            }
        }
        if let Some(r) = st.resource(p) {
            match contact(r) {
                Contact::Pass => {}
                Contact::Block => {
                    hit.blocked_at = Some(p);
                    break;
                }
                Contact::Hit => {
                    hit.resources.push(p);
                    if pierce == 0 {
                        break;
                    }
                    pierce -= 1;
                }
            }
        }
    }
    hit
}
