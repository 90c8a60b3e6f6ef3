//! Box-pushing levels: corpus format, loader and a reverse-play generator.
//!
//! A corpus file holds levels separated by `; <index>` header lines, each a
//! 10x10 block of `#` wall, `$` box, `.` goal, `*` box on goal, `@` player,
//! `+` player on goal and ` ` floor.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::compiler::{LevelBlueprint, Placement, PlacementKind};
use crate::geom::{Coord, Dir, Grid, Rect, MAP_HEIGHT, MAP_WIDTH};
use crate::rng::GameRng;
use crate::terrain::Terrain;

use super::TaskError;

pub const SIDE: usize = 10;

fn malformed(index: usize, reason: impl Into<String>) -> TaskError {
    TaskError::MalformedLevel {
        index,
        reason: reason.into(),
    }
}

/// Splits a corpus into `(index, rows)` pairs.
pub fn split_levels(text: &str) -> Result<Vec<(usize, Vec<String>)>, TaskError> {
    let mut out: Vec<(usize, Vec<String>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix(';') {
            let index = rest
                .trim()
                .parse()
                .map_err(|_| malformed(out.len(), format!("bad header on line {}", lineno + 1)))?;
            out.push((index, Vec::new()));
        } else if line.trim().is_empty() {
            continue;
        } else {
            match out.last_mut() {
                Some((_, rows)) => rows.push(line.to_string()),
                None => return Err(malformed(0, format!("rows before the first header on line {}", lineno + 1))),
            }
        }
    }
    Ok(out)
}

/// Parses every level of a corpus into a blueprint: boxes become boulders,
/// goals become fountains and the player cell becomes the start.
pub fn load_boxoban(text: &str) -> Result<Vec<LevelBlueprint>, TaskError> {
    split_levels(text)?
        .into_iter()
        .map(|(index, rows)| level_blueprint(index, &rows))
        .collect()
}

pub fn level_blueprint(index: usize, rows: &[String]) -> Result<LevelBlueprint, TaskError> {
    if rows.len() != SIDE {
        return Err(malformed(index, format!("expected {SIDE} rows, found {}", rows.len())));
    }
    let mut cells = vec![[' '; SIDE]; SIDE];
    for (y, row) in rows.iter().enumerate() {
        let n = row.chars().count();
        if n > SIDE {
            return Err(malformed(index, format!("row {y} has {n} columns")));
        }
        for (x, ch) in row.chars().enumerate() {
            if !"#$.@ *+".contains(ch) {
                return Err(malformed(index, format!("unexpected character {ch:?} in row {y}")));
            }
            cells[y][x] = ch;
        }
    }
    let all = || (0..SIDE).flat_map(|y| (0..SIDE).map(move |x| (x, y)));
    let count = |set: &str| all().filter(|&(x, y)| set.contains(cells[y][x])).count();
    let players = count("@+");
    if players != 1 {
        return Err(malformed(index, format!("expected one player, found {players}")));
    }
    let (boxes, goals) = (count("$*"), count(".*+"));
    if boxes == 0 || boxes != goals {
        return Err(malformed(index, format!("{boxes} boxes for {goals} goals")));
    }

    let x0 = (MAP_WIDTH - SIDE) as i32 / 2;
    let y0 = (MAP_HEIGHT - SIDE) as i32 / 2;
    let to_canvas = |x: usize, y: usize| Coord::new(x0 + x as i32, y0 + y as i32);
    let (px, py) = all().find(|&(x, y)| "@+".contains(cells[y][x])).expect("counted above");

    let mut inside = [[false; SIDE]; SIDE];
    inside[py][px] = true;
    let mut queue = VecDeque::from([(px, py)]);
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as i32 + dx, y as i32 + dy);
            if nx < 0 || ny < 0 || nx >= SIDE as i32 || ny >= SIDE as i32 {
                return Err(malformed(index, "the player area is not enclosed by walls"));
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !inside[ny][nx] && cells[ny][nx] != '#' {
                inside[ny][nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    if all().any(|(x, y)| "$*.+".contains(cells[y][x]) && !inside[y][x]) {
        return Err(malformed(index, "a box or goal lies outside the player area"));
    }

    let mut bp = LevelBlueprint::empty(&format!("boxoban-{index}"), Terrain::Solid);
    let wall = |x: usize, y: usize| cells[y][x] == '#';
    for (x, y) in all() {
        let c = to_canvas(x, y);
        let t = if wall(x, y) {
            let horizontal = (x > 0 && wall(x - 1, y)) || (x + 1 < SIDE && wall(x + 1, y));
            if horizontal {
                Terrain::WallH
            } else {
                Terrain::WallV
            }
        } else if !inside[y][x] {
            Terrain::Solid
        } else if ".*+".contains(cells[y][x]) {
            Terrain::Fountain
        } else {
            Terrain::Floor
        };
        bp.terrain[c] = t;
        bp.lit[c] = true;
        if "$*".contains(cells[y][x]) {
            bp.placements
                .push(Placement::new(PlacementKind::Object, "boulder", '`', c));
        }
    }
    bp.start_pos = Some(to_canvas(px, py));
    bp.map_area = Rect::from_origin_size(to_canvas(0, 0), SIDE as i32, SIDE as i32);
    Ok(bp)
}

/// Generator settings for one corpus.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub boxes: usize,
    /// Interior wall cells added to the open 8x8 area.
    pub walls: usize,
    /// Reverse moves played from the solved state.
    pub pulls: usize,
}

pub const UNFILTERED: GenParams = GenParams {
    boxes: 4,
    walls: 8,
    pulls: 120,
};
pub const MEDIUM: GenParams = GenParams {
    boxes: 4,
    walls: 12,
    pulls: 300,
};
pub const HARD: GenParams = GenParams {
    boxes: 4,
    walls: 16,
    pulls: 600,
};

/// A generated level with a move sequence that solves it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub rows: Vec<String>,
    pub solution: Vec<Dir>,
}

fn interior_connected(open: &[[bool; SIDE]; SIDE]) -> bool {
    let cells: Vec<(usize, usize)> = (0..SIDE)
        .flat_map(|y| (0..SIDE).map(move |x| (x, y)))
        .filter(|&(x, y)| open[y][x])
        .collect();
    let Some(&first) = cells.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some((x, y)) = queue.pop_front() {
        for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if open[ny][nx] && seen.insert((nx, ny)) {
                queue.push_back((nx, ny));
            }
        }
    }
    seen.len() == cells.len()
}

/// Builds a level by pulling boxes away from their goals. Every pull is a
/// push when replayed forwards, so the reversed move list solves the level.
pub fn generate(params: GenParams, seed: u64) -> Generated {
    let mut rng = GameRng::new(seed);
    loop {
        if let Some(g) = try_generate(params, &mut rng) {
            return g;
        }
    }
}

fn try_generate(params: GenParams, rng: &mut GameRng) -> Option<Generated> {
    let mut open = [[false; SIDE]; SIDE];
    for row in open.iter_mut().take(SIDE - 1).skip(1) {
        for cell in row.iter_mut().take(SIDE - 1).skip(1) {
            *cell = true;
        }
    }
    let mut placed = 0;
    for _ in 0..params.walls * 20 {
        if placed == params.walls {
            break;
        }
        let (x, y) = (rng.range(1, SIDE as i32 - 2) as usize, rng.range(1, SIDE as i32 - 2) as usize);
        if !open[y][x] {
            continue;
        }
        open[y][x] = false;
        if interior_connected(&open) {
            placed += 1;
        } else {
            open[y][x] = true;
        }
    }
    let mut free: Vec<(usize, usize)> = (0..SIDE)
        .flat_map(|y| (0..SIDE).map(move |x| (x, y)))
        .filter(|&(x, y)| open[y][x])
        .collect();
    if free.len() < params.boxes + 4 {
        return None;
    }
    rng.shuffle(&mut free);
    let goals: Vec<(usize, usize)> = free[..params.boxes].to_vec();
    let mut boxes = goals.clone();
    let mut player = free[params.boxes];
    let mut moves: Vec<Dir> = Vec::new();
    for _ in 0..params.pulls {
        let d = *rng.choose(&Dir::CARDINAL).expect("four directions");
        let (dx, dy) = d.delta();
        let next = ((player.0 as i32 + dx) as usize, (player.1 as i32 + dy) as usize);
        if !open[next.1][next.0] || boxes.contains(&next) {
            continue;
        }
        let behind = ((player.0 as i32 - dx) as usize, (player.1 as i32 - dy) as usize);
        if let Some(i) = boxes.iter().position(|&b| b == behind) {
            if rng.chance(0.7) {
                boxes[i] = player;
            }
        }
        player = next;
        moves.push(d);
    }
    let off_goal = boxes.iter().filter(|b| !goals.contains(b)).count();
    if off_goal < params.boxes.min(3) {
        return None;
    }
    let solution = replay_solution(&open, &goals, &boxes, player, &moves)?;
    let mut rows = Vec::with_capacity(SIDE);
    for (y, line) in open.iter().enumerate() {
        let mut row = String::with_capacity(SIDE);
        for (x, &floor) in line.iter().enumerate() {
            let c = (x, y);
            let goal = goals.contains(&c);
            row.push(if !floor {
                '#'
            } else if boxes.contains(&c) {
                if goal {
                    '*'
                } else {
                    '$'
                }
            } else if player == c {
                if goal {
                    '+'
                } else {
                    '@'
                }
            } else if goal {
                '.'
            } else {
                ' '
            });
        }
        rows.push(row);
    }
    Some(Generated { rows, solution })
}

/// Reverses the pull sequence and checks by forward simulation that it solves
/// the level.
fn replay_solution(
    open: &[[bool; SIDE]; SIDE],
    goals: &[(usize, usize)],
    boxes: &[(usize, usize)],
    player: (usize, usize),
    moves: &[Dir],
) -> Option<Vec<Dir>> {
    let opposite = |d: Dir| {
        let (dx, dy) = d.delta();
        Dir::from_delta(-dx, -dy).expect("cardinal")
    };
    let forward: Vec<Dir> = moves.iter().rev().map(|&d| opposite(d)).collect();
    let mut b: Vec<(usize, usize)> = boxes.to_vec();
    let mut p = player;
    for &d in &forward {
        let (dx, dy) = d.delta();
        let n = ((p.0 as i32 + dx) as usize, (p.1 as i32 + dy) as usize);
        if !open[n.1][n.0] {
            return None;
        }
        if let Some(i) = b.iter().position(|&q| q == n) {
            let beyond = ((n.0 as i32 + dx) as usize, (n.1 as i32 + dy) as usize);
            if !open[beyond.1][beyond.0] || b.contains(&beyond) {
                return None;
            }
            b[i] = beyond;
        }
        p = n;
    }
    let mut sorted_b = b.clone();
    sorted_b.sort_unstable();
    let mut sorted_g = goals.to_vec();
    sorted_g.sort_unstable();
    (sorted_b == sorted_g).then_some(forward)
}

/// Renders `count` generated levels in corpus format.
pub fn generate_corpus(params: GenParams, seed: u64, count: usize) -> String {
    let mut out = String::new();
    for i in 0..count {
        let g = generate(params, seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
        let _ = writeln!(out, "; {i}");
        for r in &g.rows {
            let _ = writeln!(out, "{r}");
        }
        out.push('\n');
    }
    out
}

/// Seeds and sizes of the shipped corpora, by task suffix.
pub const CORPORA: [(&str, GenParams, u64, usize); 3] = [
    ("Unfiltered", UNFILTERED, 1, 100),
    ("Medium", MEDIUM, 2, 100),
    ("Hard", HARD, 3, 100),
];

pub const UNFILTERED_TEXT: &str = include_str!("../../data/boxoban/unfiltered.txt");
pub const MEDIUM_TEXT: &str = include_str!("../../data/boxoban/medium.txt");
pub const HARD_TEXT: &str = include_str!("../../data/boxoban/hard.txt");

/// The shipped corpus text for a task suffix.
pub fn corpus_text(name: &str) -> Option<&'static str> {
    match name {
        "Unfiltered" => Some(UNFILTERED_TEXT),
        "Medium" => Some(MEDIUM_TEXT),
        "Hard" => Some(HARD_TEXT),
        _ => None,
    }
}

/// Cells of a blueprint's boulders, for comparing against other simulators.
pub fn boulder_cells(bp: &LevelBlueprint) -> Vec<Coord> {
    bp.placements_of(PlacementKind::Object)
        .filter(|p| p.name == "boulder")
        .map(|p| p.pos)
        .collect()
}

/// Whether a terrain grid cell is a goal.
pub fn is_goal(terrain: &Grid<Terrain>, c: Coord) -> bool {
    terrain[c] == Terrain::Fountain
}
