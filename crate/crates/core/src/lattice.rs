//! Integer-lattice geometry: directions, points and k-dimensional meshes.
//!
//! Directions follow one global order, `west, north, east, south` for two
//! dimensions with `down, up` appended in three. Glue tuples, message buffers
//! and file formats are all indexed by this order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of sides any cell can have (k = 3).
pub const MAX_DEGREE: usize = 6;

/// A unit vector of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    West,
    North,
    East,
    South,
    Down,
    Up,
}

const ALL_DIRECTIONS: [Direction; MAX_DEGREE] = [
    Direction::West,
    Direction::North,
    Direction::East,
    Direction::South,
    Direction::Down,
    Direction::Up,
];

impl Direction {
    /// The `2k` directions of dimension `k`, in canonical order.
    pub fn all(dim: usize) -> &'static [Direction] {
        match dim {
            2 => &ALL_DIRECTIONS[..4],
            _ => &ALL_DIRECTIONS[..],
        }
    }

    /// Position of this direction in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        ALL_DIRECTIONS.get(i).copied()
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::West => Direction::East,
            Direction::East => Direction::West,
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }

    pub fn offset(self) -> Point {
        match self {
            Direction::West => Point::new(-1, 0, 0),
            Direction::North => Point::new(0, 1, 0),
            Direction::East => Point::new(1, 0, 0),
            Direction::South => Point::new(0, -1, 0),
            Direction::Down => Point::new(0, 0, -1),
            Direction::Up => Point::new(0, 0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::West => "west",
            Direction::North => "north",
            Direction::East => "east",
            Direction::South => "south",
            Direction::Down => "down",
            Direction::Up => "up",
        }
    }

    pub fn from_name(name: &str) -> Option<Direction> {
        ALL_DIRECTIONS.iter().copied().find(|d| d.name() == name)
    }
}

/// A lattice point. Two-dimensional points keep `z = 0`.
///
/// Points are ordered by `(z, y, x)`, which is the order processors are
/// numbered in a [`Mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64, z: i64) -> Point {
        Point { x, y, z }
    }

    pub const fn xy(x: i64, y: i64) -> Point {
        Point { x, y, z: 0 }
    }

    pub fn step(self, dir: Direction) -> Point {
        self + dir.offset()
    }

    pub fn l1_distance(self, other: Point) -> u64 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) + self.z.abs_diff(other.z)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.z, self.y, self.x).cmp(&(other.z, other.y, other.x))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// The k-dimensional mesh `{0,…,n−1}^k` with L1-distance-1 adjacency.
///
/// `side` counts points per axis, so an `n × n` surface is `Mesh::new(2, n)`
/// and has `n^k` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mesh {
    dim: usize,
    side: usize,
}

impl Mesh {
    pub fn new(dim: usize, side: usize) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if side == 0 {
            return Err(Error::Domain("mesh side length must be positive".into()));
        }
        Ok(Mesh { dim, side })
    }

    pub fn square(side: usize) -> Result<Mesh> {
        Mesh::new(2, side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of sides of every cell, `d = 2k`.
    pub fn degree(&self) -> usize {
        2 * self.dim
    }

    pub fn directions(&self) -> &'static [Direction] {
        Direction::all(self.dim)
    }

    pub fn vertex_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn contains(&self, p: Point) -> bool {
        let n = self.side as i64;
        let inside = |c: i64| (0..n).contains(&c);
        inside(p.x) && inside(p.y) && if self.dim == 2 { p.z == 0 } else { inside(p.z) }
    }

    /// Linear index of a vertex, `x + n·y + n²·z`.
    pub fn index(&self, p: Point) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let n = self.side;
        Some(p.x as usize + n * (p.y as usize + n * p.z as usize))
    }

    pub fn point(&self, index: usize) -> Point {
        let n = self.side;
        Point::new((index % n) as i64, ((index / n) % n) as i64, (index / (n * n)) as i64)
    }

    /// All vertices in canonical (index) order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.vertex_count()).map(move |i| self.point(i))
    }

    fn check(&self, v: Point) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{v} is not a vertex of the {}-dimensional mesh of side {}", self.dim, self.side)))
        }
    }

    /// Mesh vertices at L1 distance exactly 1 from `v`, in canonical direction order.
    pub fn neighbors(&self, v: Point) -> Result<Vec<Point>> {
        self.check(v)?;
        Ok(self
            .directions()
            .iter()
            .map(|&d| v.step(d))
            .filter(|&p| self.contains(p))
            .collect())
    }

    /// For each direction, whether `v` has a neighbor there. Missing directions
    /// are where the empty glue and the empty message are substituted.
    pub fn boundary_padding(&self, v: Point) -> Result<Vec<(Direction, bool)>> {
        self.check(v)?;
        Ok(self.directions().iter().map(|&d| (d, self.contains(v.step(d)))).collect())
    }

    /// Neighbor index in direction `d`, if it exists. `index` must be a valid vertex index.
    pub fn neighbor_index(&self, index: usize, d: Direction) -> Option<usize> {
        self.index(self.point(index).step(d))
    }
}
