//! Grid navigation for scripted bots.
//!
//! Paths are breadth-first over the four neighbours in N, E, S, W order and
//! are recomputed every step, so a bot reacts to avatars that move into its
//! way. Other avatars count as obstacles.

use std::collections::VecDeque;

use crate::engine::render::{AHEAD, SIDE};
use crate::engine::{ActionSet, GridState, Orientation, Pos, Resource, Rules};

/// A cell `player` could stand on next step, ignoring its own position.
pub fn walkable(st: &GridState, rules: &dyn Rules, player: usize, p: Pos) -> bool {
    st.in_bounds(p)
        && rules.passable(st, player, p)
        && !st.resource(p).is_some_and(Resource::blocks_movement)
        && st.avatar_at(p).map_or(true, |o| o == player)
}

/// Result of a search: the first move and the cell finally reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    /// `None` when already standing on a goal cell.
    pub first: Option<Orientation>,
    pub goal: Pos,
    pub dist: u32,
}

/// Shortest route from the player's cell to the nearest cell satisfying
/// `is_goal`. Ties between equally near goals go to the one found first in
/// N, E, S, W expansion order.
pub fn route(
    st: &GridState,
    rules: &dyn Rules,
    player: usize,
    is_goal: impl Fn(Pos) -> bool,
) -> Option<Route> {
    route_avoiding(st, rules, player, is_goal, |_| false)
}

/// [`route`] that also refuses to step on cells where `avoid` holds
/// (goal cells excepted).
pub fn route_avoiding(
    st: &GridState,
    rules: &dyn Rules,
    player: usize,
    is_goal: impl Fn(Pos) -> bool,
    avoid: impl Fn(Pos) -> bool,
) -> Option<Route> {
    let start = st.avatars[player].pos;
    if is_goal(start) {
        return Some(Route { first: None, goal: start, dist: 0 });
    }
    let n = st.layout.len();
    // first move used to reach each cell
    let mut via: Vec<Option<(Orientation, u32)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[st.layout.index(start)] = true;
    let mut queue = VecDeque::new();
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let here = via[st.layout.index(p)];
        for dir in Orientation::ALL {
            let q = p.step(dir);
            if !st.in_bounds(q) {
                continue;
            }
            let qi = st.layout.index(q);
            if seen[qi] || !walkable(st, rules, player, q) || (avoid(q) && !is_goal(q)) {
                continue;
            }
            seen[qi] = true;
            let (first, d) = match here {
                None => (dir, 1),
                Some((f, d)) => (f, d + 1),
            };
            via[qi] = Some((first, d));
            if is_goal(q) {
                return Some(Route { first: Some(first), goal: q, dist: d });
            }
            queue.push_back(q);
        }
    }
    None
}

/// Movement action index that steps in absolute direction `dir`.
pub fn move_action(actions: &ActionSet, facing: Orientation, dir: Orientation) -> usize {
    let name = if dir == facing {
        "forward"
    } else if dir == facing.opposite() {
        "backward"
    } else if dir == facing.left() {
        "strafe_left"
    } else {
        "strafe_right"
    };
    actions.index_of(name).unwrap_or(0)
}

/// Turn action that brings `facing` closer to `want`, or `None` when
/// already facing it.
pub fn turn_action(actions: &ActionSet, facing: Orientation, want: Orientation) -> Option<usize> {
    if facing == want {
        None
    } else if facing.right() == want {
        actions.index_of("turn_right")
    } else {
        actions.index_of("turn_left")
    }
}

/// Direction and distance from `from` to `to` when they share a row or
/// column and no wall lies strictly between them.
pub fn in_line(st: &GridState, from: Pos, to: Pos) -> Option<(Orientation, i32)> {
    let dir = if from.x == to.x && to.y < from.y {
        Orientation::North
    } else if from.x == to.x && to.y > from.y {
        Orientation::South
    } else if from.y == to.y && to.x > from.x {
        Orientation::East
    } else if from.y == to.y && to.x < from.x {
        Orientation::West
    } else {
        return None;
    };
    let d = from.manhattan(to);
    for k in 1..d {
        if !st.terrain(from.offset(dir, k)).passable() {
            return None;
        }
    }
    Some((dir, d))
}

/// Whether `p` is inside the player's egocentric observation window.
pub fn visible(st: &GridState, player: usize, p: Pos) -> bool {
    let a = &st.avatars[player];
    if a.is_removed() {
        return false;
    }
    let (dx, dy) = (p.x - a.pos.x, p.y - a.pos.y);
    let (fx, fy) = a.orientation.delta();
    let (rx, ry) = a.orientation.right().delta();
    let ahead = dx * fx + dy * fy;
    let side = dx * rx + dy * ry;
    (-1..=AHEAD).contains(&ahead) && side.abs() <= SIDE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_moves() {
        let a = ActionSet::new([]);
        use Orientation::*;
        assert_eq!(move_action(&a, North, North), 0);
        assert_eq!(move_action(&a, North, South), 1);
        assert_eq!(move_action(&a, North, West), 2);
        assert_eq!(move_action(&a, North, East), 3);
        assert_eq!(move_action(&a, East, North), 2);
        assert_eq!(turn_action(&a, North, East), Some(5));
        assert_eq!(turn_action(&a, North, South), Some(4));
        assert_eq!(turn_action(&a, West, West), None);
    }
}
