use std::fmt;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// A cell coordinate: `x` is the column, `y` the row (row 0 is the top line of the map document).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn euclidean(self, other: Point) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The eight compass moves, listed in the fixed expansion order used by path search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    /// Column/row delta. North decreases the row index.
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::E => (1, 0),
            Direction::NE => (1, -1),
            Direction::N => (0, -1),
            Direction::NW => (-1, -1),
            Direction::W => (-1, 0),
            Direction::SW => (-1, 1),
            Direction::S => (0, 1),
            Direction::SE => (1, 1),
        }
    }

    pub const fn is_diagonal(self) -> bool {
        let (dx, dy) = self.delta();
        dx != 0 && dy != 0
    }

    pub fn step_cost(self) -> f64 {
        if self.is_diagonal() {
            std::f64::consts::SQRT_2
        } else {
            1.0
        }
    }

    pub fn between(from: Point, to: Point) -> Option<Direction> {
        let d = (to.x - from.x, to.y - from.y);
        Self::ALL.into_iter().find(|dir| dir.delta() == d)
    }
}

/// Walkable/blocked occupancy grid with optional room labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    walkable: Vec<bool>,
    room_of: Vec<Option<u8>>,
    room_names: Vec<String>,
}

impl GridMap {
    /// An all-walkable map without rooms.
    pub fn open(width: usize, height: usize) -> Self {
        Self::from_walkable(width, height, vec![true; width * height])
            .expect("open map dimensions are valid")
    }

    pub fn from_walkable(width: usize, height: usize, walkable: Vec<bool>) -> Result<Self, EnvError> {
        if width == 0 || height == 0 {
            return Err(EnvError::MalformedMap("map must have at least one row and column".into()));
        }
        if walkable.len() != width * height {
            return Err(EnvError::MalformedMap(format!(
                "expected {} cells, got {}",
                width * height,
                walkable.len()
            )));
        }
        Ok(Self {
            width,
            height,
            room_of: vec![None; walkable.len()],
            walkable,
            room_names: Vec::new(),
        })
    }

    pub(crate) fn with_rooms(mut self, names: Vec<String>, room_of: Vec<Option<u8>>) -> Result<Self, EnvError> {
        debug_assert_eq!(room_of.len(), self.walkable.len());
        for (cell, room) in room_of.iter().enumerate() {
            if room.is_some() && !self.walkable[cell] {
                return Err(EnvError::MalformedMap(format!(
                    "room label on blocked cell ({}, {})",
                    cell % self.width,
                    cell / self.width
                )));
            }
        }
        self.room_names = names;
        self.room_of = room_of;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.walkable.len()
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn is_walkable(&self, p: Point) -> bool {
        self.in_bounds(p) && self.walkable[self.cell(p)]
    }

    pub fn set_walkable(&mut self, p: Point, walkable: bool) {
        let cell = self.cell(p);
        self.walkable[cell] = walkable;
        if !walkable {
            self.room_of[cell] = None;
        }
    }

    pub(crate) fn cell(&self, p: Point) -> usize {
        debug_assert!(self.in_bounds(p));
        p.y as usize * self.width + p.x as usize
    }

    pub(crate) fn point(&self, cell: usize) -> Point {
        Point::new((cell % self.width) as i32, (cell / self.width) as i32)
    }

    pub fn walkable_points(&self) -> Vec<Point> {
        (0..self.cell_count())
            .filter(|&c| self.walkable[c])
            .map(|c| self.point(c))
            .collect()
    }

    /// Room name for a walkable cell, if the map carries a room section.
    pub fn room_at(&self, p: Point) -> Option<&str> {
        if !self.in_bounds(p) {
            return None;
        }
        self.room_of[self.cell(p)].map(|r| self.room_names[r as usize].as_str())
    }

    /// Distinct room names in declaration order.
    pub fn room_names(&self) -> &[String] {
        &self.room_names
    }

    /// Whether a single step in `dir` from `from` is legal: target walkable and,
    /// for diagonals, both orthogonally adjacent cells walkable.
    pub fn can_step(&self, from: Point, dir: Direction) -> bool {
        let (dx, dy) = dir.delta();
        let to = from.offset(dx, dy);
        if !self.is_walkable(to) {
            return false;
        }
        if dir.is_diagonal() {
            self.is_walkable(from.offset(dx, 0)) && self.is_walkable(from.offset(0, dy))
        } else {
            true
        }
    }

    /// Render the grid as rows of `.`/`#`.
    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| if self.walkable[y * self.width + x] { '.' } else { '#' })
                    .collect()
            })
            .collect()
    }
}
