//! A chain of small rooms joined by doors, each room entered from the last.

use std::fmt::Write as _;

use crate::geom::Rect;
use crate::rng::GameRng;

use super::sketch::Sketch;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiRoomOptions {
    /// One random monster in every room.
    pub monsters: bool,
    /// Doors are locked and must be kicked open.
    pub locked: bool,
    /// Walls are lava.
    pub lava: bool,
}

impl MultiRoomOptions {
    pub fn extreme() -> Self {
        MultiRoomOptions {
            monsters: true,
            locked: true,
            lava: true,
        }
    }
}

const BOX_W: i32 = 60;
const BOX_H: i32 = 19;
const MIN_SIZE: i32 = 4;

#[derive(Clone, Debug)]
pub struct Layout {
    /// Outer rectangles, walls included, in visiting order.
    pub rooms: Vec<Rect>,
    /// Door between room `i` and room `i + 1`.
    pub doors: Vec<(i32, i32)>,
}

fn place_next(prev: Rect, rooms: &[Rect], size: i32, rng: &mut GameRng) -> Option<(Rect, (i32, i32))> {
    let w = rng.range(MIN_SIZE, size);
    let h = rng.range(MIN_SIZE, size);
    let (rect, door) = match rng.below(4) {
        0 => {
            let dx = rng.range(prev.x1 + 1, prev.x2 - 1);
            let x1 = rng.range(dx - w + 2, dx - 1);
            (Rect::new(x1, prev.y1 - h + 1, x1 + w - 1, prev.y1), (dx, prev.y1))
        }
        1 => {
            let dx = rng.range(prev.x1 + 1, prev.x2 - 1);
            let x1 = rng.range(dx - w + 2, dx - 1);
            (Rect::new(x1, prev.y2, x1 + w - 1, prev.y2 + h - 1), (dx, prev.y2))
        }
        2 => {
            let dy = rng.range(prev.y1 + 1, prev.y2 - 1);
            let y1 = rng.range(dy - h + 2, dy - 1);
            (Rect::new(prev.x1 - w + 1, y1, prev.x1, y1 + h - 1), (prev.x1, dy))
        }
        _ => {
            let dy = rng.range(prev.y1 + 1, prev.y2 - 1);
            let y1 = rng.range(dy - h + 2, dy - 1);
            (Rect::new(prev.x2, y1, prev.x2 + w - 1, y1 + h - 1), (prev.x2, dy))
        }
    };
    if rect.x1 < 0 || rect.y1 < 0 || rect.x2 >= BOX_W || rect.y2 >= BOX_H {
        return None;
    }
    let inner = rect.grow(-1);
    let last = rooms.len() - 1;
    for (i, r) in rooms.iter().enumerate() {
        let clash = if i == last { r.overlaps(&inner) } else { r.overlaps(&rect) };
        if clash {
            return None;
        }
    }
    Some((rect, door))
}

/// Rooms with outer size between 4 and `size` cells, chained by shared walls.
pub fn layout(n: usize, size: i32, rng: &mut GameRng) -> Layout {
    let size = size.max(MIN_SIZE);
    loop {
        let (w, h) = (rng.range(MIN_SIZE, size), rng.range(MIN_SIZE, size));
        let x = rng.range(0, BOX_W - w);
        let y = rng.range(0, BOX_H - h);
        let mut rooms = vec![Rect::new(x, y, x + w - 1, y + h - 1)];
        let mut doors = Vec::new();
        'grow: while rooms.len() < n {
            for _ in 0..200 {
                let prev = rooms[rooms.len() - 1];
                if let Some((r, d)) = place_next(prev, &rooms, size, rng) {
                    rooms.push(r);
                    doors.push(d);
                    continue 'grow;
                }
            }
            break;
        }
        if rooms.len() == n {
            return Layout { rooms, doors };
        }
    }
}

fn random_inside(r: Rect, rng: &mut GameRng) -> (i32, i32) {
    (rng.range(r.x1 + 1, r.x2 - 1), rng.range(r.y1 + 1, r.y2 - 1))
}

/// Des source for one seeded multi-room level.
pub fn multiroom(n: usize, size: i32, o: MultiRoomOptions, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let lay = layout(n, size, &mut rng);
    let x0 = lay.rooms.iter().map(|r| r.x1).min().unwrap_or(0);
    let y0 = lay.rooms.iter().map(|r| r.y1).min().unwrap_or(0);
    let x1 = lay.rooms.iter().map(|r| r.x2).max().unwrap_or(0);
    let y1 = lay.rooms.iter().map(|r| r.y2).max().unwrap_or(0);
    let mut s = Sketch::new((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize, ' ');
    let local = |r: &Rect| Rect::new(r.x1 - x0, r.y1 - y0, r.x2 - x0, r.y2 - y0);
    let rooms: Vec<Rect> = lay.rooms.iter().map(local).collect();
    for r in &rooms {
        s.room(r.x1, r.y1, r.x2, r.y2);
    }
    if o.lava {
        for y in 0..s.height() {
            for x in 0..s.width() {
                if matches!(s.get(x, y), '-' | '|') {
                    s.set(x, y, 'L');
                }
            }
        }
    }
    let doors: Vec<(i32, i32)> = lay.doors.iter().map(|&(x, y)| (x - x0, y - y0)).collect();
    for &(x, y) in &doors {
        s.set(x, y, '+');
    }
    let mut des = s.des("multiroom", true);
    let state = if o.locked { "locked" } else { "closed" };
    for (x, y) in &doors {
        let _ = writeln!(des, "DOOR:{state},({x},{y})");
    }
    let start = random_inside(rooms[0], &mut rng);
    let stair = loop {
        let c = random_inside(rooms[rooms.len() - 1], &mut rng);
        if c != start {
            break c;
        }
    };
    let _ = writeln!(des, "STAIR:({},{}),down", stair.0, stair.1);
    if o.monsters {
        for r in &rooms {
            let cells: Vec<(i32, i32)> = (r.y1 + 1..r.y2)
                .flat_map(|y| (r.x1 + 1..r.x2).map(move |x| (x, y)))
                .filter(|&c| c != start && c != stair)
                .collect();
            if let Some((x, y)) = rng.choose(&cells) {
                let _ = writeln!(des, "MONSTER:random,({x},{y}),hostile");
            }
        }
    }
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}
