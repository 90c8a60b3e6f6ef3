//! Room placement and corridor digging for room-and-corridor levels.

use std::collections::VecDeque;

use crate::dsl::{HAlign, VAlign, Wall};
use crate::geom::{Coord, Dir, Grid, Rect, MAP_HEIGHT, MAP_WIDTH};
use crate::rng::GameRng;
use crate::terrain::Terrain;

use super::CompileErrorKind;

pub const MIN_ROOM: i32 = 3;
pub const MAX_ROOM: i32 = 9;
const PLACE_ATTEMPTS: usize = 1000;
const DOOR_ATTEMPTS: usize = 10;
const GRID_CELLS: i32 = 5;

fn canvas() -> Rect {
    Rect::new(0, 0, MAP_WIDTH as i32 - 1, MAP_HEIGHT as i32 - 1)
}

pub fn random_size(rng: &mut GameRng) -> (i32, i32) {
    (rng.range(MIN_ROOM, MAX_ROOM), rng.range(MIN_ROOM, MAX_ROOM))
}

/// Interior rectangle for a room at grid cell `pos` (1..=5 on each axis)
/// with the given alignment inside that cell. The room is clamped so its
/// walls stay on the canvas.
pub fn aligned_room(pos: (i64, i64), align: (HAlign, VAlign), size: (i32, i32)) -> Rect {
    let (w, h) = (size.0 + 2, size.1 + 2);
    let (cols, rows) = (MAP_WIDTH as i32, MAP_HEIGHT as i32);
    let px = (pos.0 as i32).clamp(1, GRID_CELLS) - 1;
    let py = (pos.1 as i32).clamp(1, GRID_CELLS) - 1;
    let (zx, zw) = (px * cols / GRID_CELLS, cols / GRID_CELLS);
    let (zy, zh) = (py * rows / GRID_CELLS, rows / GRID_CELLS);
    let x = match align.0 {
        HAlign::Left => zx,
        HAlign::Center => zx + (zw - w) / 2,
        HAlign::Right => zx + zw - w,
    };
    let y = match align.1 {
        VAlign::Top => zy,
        VAlign::Center => zy + (zh - h) / 2,
        VAlign::Bottom => zy + zh - h,
    };
    let x = x.clamp(0, (cols - w).max(0));
    let y = y.clamp(0, (rows - h).max(0));
    Rect::from_origin_size(Coord::new(x + 1, y + 1), size.0, size.1)
}

/// Rejection-samples a position for an interior of `size` whose walls lie in
/// `within` and keep a one-cell gap to every rectangle in `avoid`.
pub fn random_room(
    within: Rect,
    avoid: &[Rect],
    size: (i32, i32),
    rng: &mut GameRng,
) -> Option<Rect> {
    let (w, h) = size;
    let (max_x, max_y) = (within.x2 - w, within.y2 - h);
    let (min_x, min_y) = (within.x1 + 1, within.y1 + 1);
    if max_x < min_x || max_y < min_y {
        return None;
    }
    for _ in 0..PLACE_ATTEMPTS {
        let x = rng.range(min_x, max_x);
        let y = rng.range(min_y, max_y);
        let inner = Rect::from_origin_size(Coord::new(x, y), w, h);
        let outer = inner.grow(1);
        if avoid.iter().all(|r| !outer.grow(1).overlaps(r)) {
            return Some(inner);
        }
    }
    None
}

/// Writes floor and walls for a room with interior `inner`.
pub fn draw_room(terrain: &mut Grid<Terrain>, inner: Rect) {
    let outer = inner.grow(1);
    for c in outer.cells() {
        if !terrain.in_bounds(c) {
            continue;
        }
        terrain[c] = if inner.contains(c) {
            Terrain::Floor
        } else if c.y == outer.y1 || c.y == outer.y2 {
            Terrain::WallH
        } else {
            Terrain::WallV
        };
    }
}

/// Non-corner wall cells of the room on `wall`, in order.
pub fn wall_cells(inner: Rect, wall: Wall) -> Vec<Coord> {
    match wall {
        Wall::North => (inner.x1..=inner.x2).map(|x| Coord::new(x, inner.y1 - 1)).collect(),
        Wall::South => (inner.x1..=inner.x2).map(|x| Coord::new(x, inner.y2 + 1)).collect(),
        Wall::West => (inner.y1..=inner.y2).map(|y| Coord::new(inner.x1 - 1, y)).collect(),
        Wall::East => (inner.y1..=inner.y2).map(|y| Coord::new(inner.x2 + 1, y)).collect(),
    }
}

pub fn outward(wall: Wall) -> Dir {
    match wall {
        Wall::North => Dir::N,
        Wall::South => Dir::S,
        Wall::East => Dir::E,
        Wall::West => Dir::W,
    }
}

fn random_door_kind(rng: &mut GameRng) -> Terrain {
    match rng.below(4) {
        0 | 1 => Terrain::Doorway,
        2 => Terrain::OpenDoor,
        _ => Terrain::ClosedDoor,
    }
}

/// Joins rooms (given by interior) into one connected network. Rooms are
/// sorted by left edge and each consecutive pair is linked by a corridor
/// between doors on their facing walls, or by a single door when the two
/// share a wall. Returns the door cells that were created.
pub fn random_corridors(
    rooms: &[Rect],
    terrain: &mut Grid<Terrain>,
    rng: &mut GameRng,
) -> Result<Vec<Coord>, CompileErrorKind> {
    let mut order: Vec<Rect> = rooms.to_vec();
    order.sort_by_key(|r| (r.x1, r.y1));
    let mut doors = Vec::new();
    for pair in order.windows(2) {
        join(pair[0], pair[1], terrain, rng, &mut doors)?;
    }
    Ok(doors)
}

fn shared_wall(a: Rect, b: Rect) -> Vec<Coord> {
    let (oa, ob) = (a.grow(1), b.grow(1));
    oa.intersect(&ob)
        .cells()
        .filter(|&c| {
            Dir::CARDINAL.iter().any(|&d| {
                let back = Dir::from_delta(-d.delta().0, -d.delta().1).unwrap_or(d);
                a.contains(c.step(d)) && b.contains(c.step(back))
            })
        })
        .collect()
}

fn join(
    a: Rect,
    b: Rect,
    terrain: &mut Grid<Terrain>,
    rng: &mut GameRng,
    doors: &mut Vec<Coord>,
) -> Result<(), CompileErrorKind> {
    let shared = shared_wall(a, b);
    if let Some(&c) = rng.choose(&shared) {
        terrain[c] = random_door_kind(rng);
        doors.push(c);
        return Ok(());
    }
    let (oa, ob) = (a.grow(1), b.grow(1));
    let (wa, wb) = if ob.x1 > oa.x2 {
        (Wall::East, Wall::West)
    } else if ob.x2 < oa.x1 {
        (Wall::West, Wall::East)
    } else if ob.y1 > oa.y2 {
        (Wall::South, Wall::North)
    } else {
        (Wall::North, Wall::South)
    };
    let (cells_a, cells_b) = (wall_cells(a, wa), wall_cells(b, wb));
    for _ in 0..DOOR_ATTEMPTS {
        let da = cells_a[rng.below(cells_a.len())];
        let db = cells_b[rng.below(cells_b.len())];
        let (sa, sb) = (da.step(outward(wa)), db.step(outward(wb)));
        if let Some(path) = dig_path(terrain, sa, sb) {
            for c in path {
                terrain[c] = Terrain::Corridor;
            }
            terrain[da] = random_door_kind(rng);
            terrain[db] = random_door_kind(rng);
            doors.push(da);
            doors.push(db);
            return Ok(());
        }
    }
    Err(CompileErrorKind::ConnectFailure)
}

fn diggable(t: Terrain) -> bool {
    matches!(t, Terrain::Solid | Terrain::Corridor)
}

/// Shortest 4-connected path through diggable cells, endpoints included.
fn dig_path(terrain: &Grid<Terrain>, from: Coord, to: Coord) -> Option<Vec<Coord>> {
    let bounds = canvas();
    let ok = |c: Coord| bounds.contains(c) && diggable(terrain[c]);
    if !ok(from) || !ok(to) {
        return None;
    }
    let mut prev: Grid<Option<Coord>> = Grid::new(terrain.width(), terrain.height(), None);
    let mut seen = Grid::new(terrain.width(), terrain.height(), false);
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut path = vec![cur];
            let mut at = cur;
            while let Some(p) = prev[at] {
                path.push(p);
                at = p;
            }
            return Some(path);
        }
        for n in cur.neighbors4() {
            if ok(n) && !seen[n] {
                seen[n] = true;
                prev[n] = Some(cur);
                queue.push_back(n);
            }
        }
    }
    None
}
