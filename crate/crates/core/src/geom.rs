//! Grid geometry shared by the compiler, the engine and the observers.

use serde::{Deserialize, Serialize};

/// Width of the map canvas in cells.
pub const MAP_WIDTH: usize = 79;
/// Height of the map canvas in cells.
pub const MAP_HEIGHT: usize = 21;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub fn step(self, dir: Dir) -> Coord {
        let (dx, dy) = dir.delta();
        Coord::new(self.x + dx, self.y + dy)
    }

    pub fn offset(self, dx: i32, dy: i32) -> Coord {
        Coord::new(self.x + dx, self.y + dy)
    }

    /// Chebyshev (king-move) distance.
    pub fn chebyshev(self, other: Coord) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn manhattan(self, other: Coord) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn neighbors8(self) -> impl Iterator<Item = Coord> {
        Dir::ALL.into_iter().map(move |d| self.step(d))
    }

    pub fn neighbors4(self) -> impl Iterator<Item = Coord> {
        Dir::CARDINAL.into_iter().map(move |d| self.step(d))
    }
}

impl std::fmt::Display for Coord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Inclusive rectangle.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
}

impl Rect {
    pub const fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Self {
        Rect { x1, y1, x2, y2 }
    }

    pub fn from_origin_size(origin: Coord, w: i32, h: i32) -> Self {
        Rect::new(origin.x, origin.y, origin.x + w - 1, origin.y + h - 1)
    }

    pub fn width(&self) -> i32 {
        self.x2 - self.x1 + 1
    }

    pub fn height(&self) -> i32 {
        self.y2 - self.y1 + 1
    }

    pub fn is_empty(&self) -> bool {
        self.x2 < self.x1 || self.y2 < self.y1
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x >= self.x1 && c.x <= self.x2 && c.y >= self.y1 && c.y <= self.y2
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x1.max(other.x1),
            self.y1.max(other.y1),
            self.x2.min(other.x2),
            self.y2.min(other.y2),
        )
    }

    pub fn grow(&self, by: i32) -> Rect {
        Rect::new(self.x1 - by, self.y1 - by, self.x2 + by, self.y2 + by)
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        let r = *self;
        (r.y1..=r.y2).flat_map(move |y| (r.x1..=r.x2).map(move |x| Coord::new(x, y)))
    }

    pub fn area(&self) -> i32 {
        if self.is_empty() {
            0
        } else {
            self.width() * self.height()
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Dir {
    pub const ALL: [Dir; 8] = [
        Dir::N,
        Dir::NE,
        Dir::E,
        Dir::SE,
        Dir::S,
        Dir::SW,
        Dir::W,
        Dir::NW,
    ];
    pub const CARDINAL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::N => (0, -1),
            Dir::NE => (1, -1),
            Dir::E => (1, 0),
            Dir::SE => (1, 1),
            Dir::S => (0, 1),
            Dir::SW => (-1, 1),
            Dir::W => (-1, 0),
            Dir::NW => (-1, -1),
        }
    }

    pub fn from_delta(dx: i32, dy: i32) -> Option<Dir> {
        Dir::ALL
            .into_iter()
            .find(|d| d.delta() == (dx.signum(), dy.signum()) && (dx, dy) != (0, 0))
    }

    pub fn is_diagonal(self) -> bool {
        let (dx, dy) = self.delta();
        dx != 0 && dy != 0
    }

    pub fn name(self) -> &'static str {
        match self {
            Dir::N => "n",
            Dir::NE => "ne",
            Dir::E => "e",
            Dir::SE => "se",
            Dir::S => "s",
            Dir::SW => "sw",
            Dir::W => "w",
            Dir::NW => "nw",
        }
    }

    pub fn from_name(s: &str) -> Option<Dir> {
        Dir::ALL.into_iter().find(|d| d.name() == s)
    }
}

/// Dense row-major grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    cells: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Grid {
            width,
            height,
            cells: vec![fill; width * height],
        }
    }

    pub fn fill(&mut self, value: T) {
        for c in &mut self.cells {
            *c = value.clone();
        }
    }
}

impl<T> Grid<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width as i32 - 1, self.height as i32 - 1)
    }

    #[inline]
    pub fn index(&self, c: Coord) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    #[inline]
    pub fn get(&self, c: Coord) -> Option<&T> {
        if self.in_bounds(c) {
            Some(&self.cells[self.index(c)])
        } else {
            None
        }
    }

    #[inline]
    pub fn set(&mut self, c: Coord, value: T) {
        let i = self.index(c);
        self.cells[i] = value;
    }

    pub fn get_mut(&mut self, c: Coord) -> Option<&mut T> {
        if self.in_bounds(c) {
            let i = self.index(c);
            Some(&mut self.cells[i])
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.cells
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.cells
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.cells[y * self.width..(y + 1) * self.width]
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> {
        let w = self.width as i32;
        let h = self.height as i32;
        (0..h).flat_map(move |y| (0..w).map(move |x| Coord::new(x, y)))
    }
}

impl<T> std::ops::Index<Coord> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, c: Coord) -> &T {
        &self.cells[Grid::index(self, c)]
    }
}

impl<T> std::ops::IndexMut<Coord> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, c: Coord) -> &mut T {
        let i = Grid::index(self, c);
        &mut self.cells[i]
    }
}

/// Cells on the Bresenham segment from `a` to `b`, endpoints included.
pub fn bresenham(a: Coord, b: Coord) -> Vec<Coord> {
    let mut out = Vec::new();
    bresenham_each(a, b, |c| {
        out.push(c);
        true
    });
    out
}

/// Walks the Bresenham segment from `a` to `b`, stopping early when `f` returns false.
/// Returns false if the walk was stopped.
pub fn bresenham_each(a: Coord, b: Coord, mut f: impl FnMut(Coord) -> bool) -> bool {
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    let sx = if a.x < b.x { 1 } else { -1 };
    let sy = if a.y < b.y { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (a.x, a.y);
    loop {
        if !f(Coord::new(x, y)) {
            return false;
        }
        if x == b.x && y == b.y {
            return true;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
