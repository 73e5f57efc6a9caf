use serde::{Deserialize, Serialize};

/// A cell coordinate. `x` grows east, `y` grows south; (0, 0) is the
/// north-west corner of the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn step(self, dir: Orientation) -> Pos {
        self.offset(dir, 1)
    }

    pub fn offset(self, dir: Orientation, n: i32) -> Pos {
        let (dx, dy) = dir.delta();
        Pos::new(self.x + dx * n, self.y + dy * n)
    }

    pub fn dist2(self, other: Pos) -> i32 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn manhattan(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    North,
    East,
    South,
    West,
}

impl Orientation {
    /// N, E, S, W: the tie-break order used by navigation.
    pub const ALL: [Orientation; 4] = [
        Orientation::North,
        Orientation::East,
        Orientation::South,
        Orientation::West,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Orientation::North => (0, -1),
            Orientation::East => (1, 0),
            Orientation::South => (0, 1),
            Orientation::West => (-1, 0),
        }
    }

    pub fn left(self) -> Self {
        match self {
            Orientation::North => Orientation::West,
            Orientation::West => Orientation::South,
            Orientation::South => Orientation::East,
            Orientation::East => Orientation::North,
        }
    }

    pub fn right(self) -> Self {
        self.left().opposite()
    }

    pub fn opposite(self) -> Self {
        self.left().left()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_compose() {
        for o in Orientation::ALL {
            assert_eq!(o.left().right(), o);
            assert_eq!(o.left().left().left().left(), o);
            assert_eq!(o.opposite().opposite(), o);
            let (dx, dy) = o.delta();
            let (rx, ry) = o.right().delta();
            // clockwise quarter turn in screen coordinates
            assert_eq!((rx, ry), (-dy, dx));
        }
    }
}
