//! Grid cells, headings and a few helpers shared by every module.
//!
//! Cells are addressed `(row, col)`. Rows grow southward and columns grow
//! eastward. Heading 0° faces east (+col) and headings increase
//! counter-clockwise, so 90° faces north (-row).

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

impl Cell {
    pub const fn new(row: i32, col: i32) -> Self {
        Cell { row, col }
    }

    pub fn offset(self, drow: i32, dcol: i32) -> Cell {
        Cell::new(self.row + drow, self.col + dcol)
    }

    /// Center of the cell in continuous cell units.
    pub fn center(self) -> (f64, f64) {
        (self.row as f64 + 0.5, self.col as f64 + 0.5)
    }

    pub fn manhattan(self, other: Cell) -> i32 {
        (self.row - other.row).abs() + (self.col - other.col).abs()
    }

    /// Euclidean distance between cell centers, in cells.
    pub fn dist(self, other: Cell) -> f64 {
        let dr = (self.row - other.row) as f64;
        let dc = (self.col - other.col) as f64;
        (dr * dr + dc * dc).sqrt()
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.row - other.row).abs().max((self.col - other.col).abs())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// One of the four cardinal headings, serialized as degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Heading {
    East,
    North,
    West,
    South,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn degrees(self) -> u16 {
        match self {
            Heading::East => 0,
            Heading::North => 90,
            Heading::West => 180,
            Heading::South => 270,
        }
    }

    pub fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    pub fn right(self) -> Heading {
        self.left().left().left()
    }

    /// Unit step `(drow, dcol)` in the facing direction.
    pub fn step(self) -> (i32, i32) {
        match self {
            Heading::East => (0, 1),
            Heading::North => (-1, 0),
            Heading::West => (0, -1),
            Heading::South => (1, 0),
        }
    }

    /// Forward and right unit vectors in `(row, col)` components.
    pub fn basis(self) -> ((f64, f64), (f64, f64)) {
        let (fr, fc) = self.step();
        // right-hand side of the facing direction
        let (rr, rc) = (fc, -fr);
        ((fr as f64, fc as f64), (rr as f64, rc as f64))
    }

    /// Heading whose direction is closest to the vector `(drow, dcol)`.
    pub fn toward(drow: f64, dcol: f64) -> Heading {
        if dcol.abs() >= drow.abs() {
            if dcol >= 0.0 {
                Heading::East
            } else {
                Heading::West
            }
        } else if drow < 0.0 {
            Heading::North
        } else {
            Heading::South
        }
    }

    /// Number of left turns needed to go from `self` to `other`.
    pub fn left_turns_to(self, other: Heading) -> u8 {
        let a = self.degrees() / 90;
        let b = other.degrees() / 90;
        ((b + 4 - a) % 4) as u8
    }
}

impl From<Heading> for u16 {
    fn from(h: Heading) -> u16 {
        h.degrees()
    }
}

impl TryFrom<u16> for Heading {
    type Error = String;

    fn try_from(deg: u16) -> Result<Self, Self::Error> {
        match deg {
            0 => Ok(Heading::East),
            90 => Ok(Heading::North),
            180 => Ok(Heading::West),
            270 => Ok(Heading::South),
            other => Err(format!("heading must be a multiple of 90 below 360, got {other}")),
        }
    }
}

/// Agent pose on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub cell: Cell,
    pub heading: Heading,
}

impl Pose {
    pub fn new(cell: Cell, heading: Heading) -> Self {
        Pose { cell, heading }
    }
}

/// Axis-aligned rectangle of cells, `[row0, row1) x [col0, col1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row0: i32,
    pub col0: i32,
    pub row1: i32,
    pub col1: i32,
}

impl Rect {
    pub fn new(row0: i32, col0: i32, row1: i32, col1: i32) -> Self {
        Rect { row0, col0, row1, col1 }
    }

    pub fn height(&self) -> i32 {
        self.row1 - self.row0
    }

    pub fn width(&self) -> i32 {
        self.col1 - self.col0
    }

    pub fn area(&self) -> i64 {
        self.height() as i64 * self.width() as i64
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row >= self.row0 && c.row < self.row1 && c.col >= self.col0 && c.col < self.col1
    }

    pub fn center(&self) -> Cell {
        Cell::new((self.row0 + self.row1) / 2, (self.col0 + self.col1) / 2)
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.row0 < o.row1 && o.row0 < self.row1 && self.col0 < o.col1 && o.col0 < self.col1
    }

    pub fn expand(&self, m: i32) -> Rect {
        Rect::new(self.row0 - m, self.col0 - m, self.row1 + m, self.col1 + m)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.row0..self.row1).flat_map(move |r| (self.col0..self.col1).map(move |c| Cell::new(r, c)))
    }

    /// Distance in cells from `c` to the nearest cell center inside the rectangle.
    pub fn dist_to(&self, c: Cell) -> f64 {
        let r = c.row.clamp(self.row0, self.row1 - 1);
        let col = c.col.clamp(self.col0, self.col1 - 1);
        c.dist(Cell::new(r, col))
    }
}

pub fn normalize(v: &mut [f32]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

pub fn norm(v: &[f32]) -> f32 {
    v.iter().map(|x| x * x).sum::<f32>().sqrt()
}

pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_left_turns_is_identity() {
        for h in Heading::ALL {
            assert_eq!(h.left().left().left().left(), h);
            assert_eq!(h.left().right(), h);
        }
    }

    #[test]
    fn basis_right_is_clockwise() {
        let (_, right) = Heading::East.basis();
        assert_eq!(right, (1.0, 0.0));
        let (_, right) = Heading::North.basis();
        assert_eq!(right, (0.0, 1.0));
    }

    #[test]
    fn heading_serializes_as_degrees() {
        assert_eq!(serde_json::to_string(&Heading::West).unwrap(), "180");
        assert!(serde_json::from_str::<Heading>("45").is_err());
    }

    #[test]
    fn rect_distance() {
        let r = Rect::new(10, 10, 12, 14);
        assert_eq!(r.dist_to(Cell::new(11, 12)), 0.0);
        assert_eq!(r.dist_to(Cell::new(11, 20)), 7.0);
    }
}
