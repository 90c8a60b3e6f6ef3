//! Reachability and solvability checks on compiled blueprints.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};

use serde::Serialize;

use crate::geom::{Coord, Dir, Grid};
use crate::terrain::Terrain;

use super::{LevelBlueprint, PlacementKind};

/// Cap on explored states when boulder pushes are part of the search.
pub const PUSH_SEARCH_LIMIT: usize = 400_000;

#[derive(Clone, Debug, Default)]
pub struct Requirements {
    /// Cells the agent must be able to reach from the start.
    pub reach: Vec<Coord>,
    /// Require the down staircase to be reachable.
    pub stair_down: bool,
    /// Search over boulder pushes (a boulder pushed into water fills it).
    pub solvable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Issue {
    MissingStart,
    MissingStairDown,
    Unreachable { target: Coord },
    HostileTerrain { name: String, pos: Coord },
    SearchLimit,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Issue::MissingStart => write!(f, "no start position"),
            Issue::MissingStairDown => write!(f, "no down staircase"),
            Issue::Unreachable { target } => write!(f, "{target} is unreachable"),
            Issue::HostileTerrain { name, pos } => write!(f, "{name} at {pos} stands on hostile terrain"),
            Issue::SearchLimit => write!(f, "push search exceeded its state limit"),
        }
    }
}

/// Terrain the agent can eventually cross without items.
pub fn passable(t: Terrain) -> bool {
    t.is_walkable() || matches!(t, Terrain::ClosedDoor | Terrain::LockedDoor)
}

fn blocks_diagonal(t: Terrain) -> bool {
    matches!(t, Terrain::OpenDoor | Terrain::ClosedDoor | Terrain::LockedDoor)
}

pub fn validate_blueprint(bp: &LevelBlueprint, req: &Requirements) -> Vec<Issue> {
    let mut issues = Vec::new();
    for p in &bp.placements {
        let t = bp.terrain[p.pos];
        let ok = match p.kind {
            PlacementKind::Feature => t.is_feature(),
            PlacementKind::Trap => t.is_open_floor(),
            _ => t.is_walkable(),
        };
        if !ok {
            issues.push(Issue::HostileTerrain {
                name: p.name.clone(),
                pos: p.pos,
            });
        }
    }
    let Some(start) = bp.start_pos else {
        issues.push(Issue::MissingStart);
        return issues;
    };
    let mut targets = req.reach.clone();
    if req.stair_down {
        match bp.stair_down() {
            Some(s) => targets.push(s),
            None => issues.push(Issue::MissingStairDown),
        }
    }
    if targets.is_empty() {
        return issues;
    }
    if req.solvable {
        for t in targets {
            match push_search(bp, start, &[t], PUSH_SEARCH_LIMIT) {
                Some(true) => {}
                Some(false) => issues.push(Issue::Unreachable { target: t }),
                None => issues.push(Issue::SearchLimit),
            }
        }
    } else {
        let seen = flood(&bp.terrain, start);
        for t in targets {
            if !seen[t] {
                issues.push(Issue::Unreachable { target: t });
            }
        }
    }
    issues
}

/// 8-connected flood fill over passable terrain.
pub fn flood(terrain: &Grid<Terrain>, start: Coord) -> Grid<bool> {
    let mut seen = Grid::new(terrain.width(), terrain.height(), false);
    if !terrain.in_bounds(start) {
        return seen;
    }
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for d in Dir::ALL {
            let n = c.step(d);
            if !terrain.in_bounds(n) || seen[n] || !passable(terrain[n]) {
                continue;
            }
            if d.is_diagonal() && (blocks_diagonal(terrain[c]) || blocks_diagonal(terrain[n])) {
                continue;
            }
            seen[n] = true;
            queue.push_back(n);
        }
    }
    seen
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PushState {
    /// Smallest cell of the agent's reachable region.
    agent: Coord,
    boulders: BTreeSet<Coord>,
    filled: BTreeSet<Coord>,
}

/// Cells the agent can walk to without pushing anything.
fn region(terrain: &Grid<Terrain>, s: &PushState, from: Coord) -> Vec<Coord> {
    let cell = |c: Coord| if s.filled.contains(&c) { Terrain::Floor } else { terrain[c] };
    let mut seen = HashSet::from([from]);
    let mut out = vec![from];
    let mut i = 0;
    while i < out.len() {
        let c = out[i];
        i += 1;
        for d in Dir::ALL {
            let n = c.step(d);
            if !terrain.in_bounds(n) || seen.contains(&n) || s.boulders.contains(&n) || !passable(cell(n)) {
                continue;
            }
            if d.is_diagonal() && (blocks_diagonal(cell(c)) || blocks_diagonal(cell(n))) {
                continue;
            }
            seen.insert(n);
            out.push(n);
        }
    }
    out
}

/// Search over boulder pushes, with the agent's position reduced to the
/// region it can walk around in. States with more filled water are expanded
/// first. Returns `None` when the state limit is hit before a verdict.
pub fn push_search(bp: &LevelBlueprint, start: Coord, goals: &[Coord], limit: usize) -> Option<bool> {
    let terrain = &bp.terrain;
    let boulders: BTreeSet<Coord> = bp
        .placements_of(PlacementKind::Object)
        .filter(|p| p.name == "boulder")
        .map(|p| p.pos)
        .collect();
    let init = PushState {
        agent: start,
        boulders,
        filled: BTreeSet::new(),
    };
    let canon = |cells: &[Coord]| cells.iter().copied().min_by_key(|c| (c.y, c.x)).unwrap_or(start);
    let first = region(terrain, &init, start);
    let init = PushState {
        agent: canon(&first),
        ..init
    };
    let mut seen = HashSet::from([init.clone()]);
    let mut order = 0u64;
    let mut queue = BinaryHeap::from([(0usize, Reverse(order), init)]);
    while let Some((_, _, s)) = queue.pop() {
        let cells = region(terrain, &s, s.agent);
        if cells.iter().any(|c| goals.contains(c)) {
            return Some(true);
        }
        if seen.len() > limit {
            return None;
        }
        let cell = |c: Coord| if s.filled.contains(&c) { Terrain::Floor } else { terrain[c] };
        for &c in &cells {
            for d in Dir::CARDINAL {
                let n = c.step(d);
                if !s.boulders.contains(&n) {
                    continue;
                }
                let beyond = n.step(d);
                if !terrain.in_bounds(beyond) || s.boulders.contains(&beyond) {
                    continue;
                }
                let mut next = s.clone();
                next.boulders.remove(&n);
                match cell(beyond) {
                    Terrain::Water => {
                        next.filled.insert(beyond);
                    }
                    Terrain::Lava => {}
                    t if t.is_walkable() && !t.is_door() => {
                        next.boulders.insert(beyond);
                    }
                    _ => continue,
                }
                next.agent = canon(&region(terrain, &next, n));
                if seen.insert(next.clone()) {
                    order += 1;
                    queue.push((next.filled.len(), Reverse(order), next));
                }
            }
        }
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_first;
    use crate::dsl::parse_document;

    fn room(rows: &str) -> LevelBlueprint {
        let src = format!("MAZE: \"v\", ' '\nMAP\n{rows}\nENDMAP\nBRANCH:(1,1,1,1),(0,0,0,0)\n");
        compile_first(&parse_document(&src).unwrap(), 0).unwrap()
    }

    #[test]
    fn open_room_ok() {
        let bp = room("-----\n|...|\n|...|\n|..>|\n-----");
        let issues = validate_blueprint(
            &bp,
            &Requirements {
                stair_down: true,
                ..Default::default()
            },
        );
        assert!(issues.is_empty(), "{issues:?}");
    }

    #[test]
    fn sealed_stair() {
        let bp = room("-------\n|..| >|\n|..|  |\n-------");
        let issues = validate_blueprint(
            &bp,
            &Requirements {
                stair_down: true,
                ..Default::default()
            },
        );
        assert!(matches!(issues.as_slice(), [Issue::Unreachable { .. }]));
    }
}
