//! Perfect-maze carving for `MAZEWALK`.

use crate::geom::{Coord, Dir, Grid, Rect};
use crate::rng::GameRng;
use crate::terrain::Terrain;

use super::CompileErrorKind;

/// Carves a maze into the solid cells of `region` with an iterative recursive
/// backtracker that moves two cells at a time, then turns solid cells that
/// touch a passage into walls. Carving starts one step from `entry` in
/// direction `dir` when that cell is solid, otherwise at `entry` itself.
pub fn mazewalk(
    terrain: &mut Grid<Terrain>,
    region: Rect,
    entry: Coord,
    dir: Dir,
    rng: &mut GameRng,
) -> Result<(), CompileErrorKind> {
    if region.width() < 3 || region.height() < 3 {
        return Err(CompileErrorKind::RegionTooSmall {
            width: region.width(),
            height: region.height(),
        });
    }
    if !region.contains(entry) {
        return Err(CompileErrorKind::OutOfBounds { coord: entry });
    }
    let first = entry.step(dir);
    let start = if region.contains(first) && terrain[first] == Terrain::Solid {
        first
    } else {
        entry
    };

    let solid = |t: &Grid<Terrain>, c: Coord| region.contains(c) && t[c] == Terrain::Solid;
    let mut carved = Grid::new(terrain.width(), terrain.height(), false);
    carved[start] = true;
    let mut stack = vec![start];
    while let Some(&cur) = stack.last() {
        let options: Vec<(Coord, Coord)> = Dir::CARDINAL
            .iter()
            .map(|&d| (cur.step(d), cur.step(d).step(d)))
            .filter(|&(mid, next)| {
                solid(terrain, next) && !carved[next] && solid(terrain, mid) && !carved[mid]
            })
            .collect();
        match rng.choose(&options) {
            Some(&(mid, next)) => {
                carved[mid] = true;
                carved[next] = true;
                stack.push(next);
            }
            None => {
                stack.pop();
            }
        }
    }

    for c in region.cells() {
        if carved[c] {
            terrain[c] = Terrain::Floor;
        }
    }
    terrain[entry] = Terrain::Floor;
    wallify(terrain, region);
    Ok(())
}

/// Converts solid cells of `region` adjacent to walkable cells into walls.
pub fn wallify(terrain: &mut Grid<Terrain>, region: Rect) {
    let snapshot = terrain.clone();
    let open = |c: Coord| snapshot.get(c).is_some_and(|t| t.is_walkable());
    for c in region.cells() {
        if snapshot[c] != Terrain::Solid || !c.neighbors8().any(open) {
            continue;
        }
        let vertical_open = open(c.step(Dir::N)) || open(c.step(Dir::S));
        let horizontal_open = open(c.step(Dir::E)) || open(c.step(Dir::W));
        terrain[c] = if !vertical_open && horizontal_open {
            Terrain::WallV
        } else {
            Terrain::WallH
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid_grid(w: usize, h: usize) -> Grid<Terrain> {
        Grid::new(w, h, Terrain::Solid)
    }

    #[test]
    fn smallest_maze() {
        let mut g = solid_grid(3, 3);
        let mut rng = GameRng::new(0);
        let b = g.bounds();
        mazewalk(&mut g, b, Coord::new(0, 1), Dir::E, &mut rng).unwrap();
        let floor: Vec<Coord> = g.coords().filter(|&c| g[c] == Terrain::Floor).collect();
        assert_eq!(floor, vec![Coord::new(0, 1), Coord::new(1, 1)]);
    }

    #[test]
    fn too_small() {
        let mut g = solid_grid(2, 5);
        let mut rng = GameRng::new(0);
        let b = g.bounds();
        let err = mazewalk(&mut g, b, Coord::new(0, 1), Dir::E, &mut rng).unwrap_err();
        assert!(matches!(err, CompileErrorKind::RegionTooSmall { .. }));
    }

    #[test]
    fn deterministic() {
        let run = |seed| {
            let mut g = solid_grid(15, 15);
            let mut rng = GameRng::new(seed);
            let b = g.bounds();
            mazewalk(&mut g, b, Coord::new(0, 1), Dir::E, &mut rng).unwrap();
            g
        };
        assert_eq!(run(4), run(4));
        assert_ne!(run(4), run(5));
    }
}
