//! Field of view.

use crate::geom::{bresenham_each, Coord, Grid};
use crate::terrain::Terrain;

/// True when every cell strictly between `a` and `b` on the Bresenham
/// segment from `a` is transparent.
fn ray_clear(terrain: &Grid<Terrain>, a: Coord, b: Coord) -> bool {
    bresenham_each(a, b, |c| c == a || c == b || !terrain[c].is_opaque())
}

/// Symmetric line of sight: a clear segment traced from either end.
pub fn line_of_sight(terrain: &Grid<Terrain>, a: Coord, b: Coord) -> bool {
    a.chebyshev(b) <= 1 || ray_clear(terrain, a, b) || ray_clear(terrain, b, a)
}

/// Cells visible from `from`. Adjacent cells are always seen; farther cells
/// only when lit and in line of sight.
pub fn compute_fov(terrain: &Grid<Terrain>, lit: &Grid<bool>, from: Coord) -> Grid<bool> {
    let mut vis = Grid::new(terrain.width(), terrain.height(), false);
    fov_into(terrain, lit, from, &mut vis);
    vis
}

pub(crate) fn fov_into(terrain: &Grid<Terrain>, lit: &Grid<bool>, from: Coord, vis: &mut Grid<bool>) {
    vis.fill(false);
    if !terrain.in_bounds(from) {
        return;
    }
    // Any cell in line of sight is reached through a chain of transparent
    // cells from the viewer, so a transparent flood bounds the candidates.
    let mut seen = Grid::new(terrain.width(), terrain.height(), false);
    let mut stack = vec![from];
    let mut walls = Vec::new();
    seen[from] = true;
    while let Some(c) = stack.pop() {
        let near = c.chebyshev(from) <= 1;
        if near || (lit[c] && line_of_sight(terrain, from, c)) {
            vis[c] = true;
        }
        if c != from && terrain[c].is_opaque() {
            walls.push(c);
            continue;
        }
        for n in c.neighbors8() {
            if terrain.in_bounds(n) && !seen[n] {
                seen[n] = true;
                stack.push(n);
            }
        }
    }
    // A lit wall is seen when an open lit cell beside it is, so room walls
    // do not vanish at grazing angles.
    for c in walls {
        if lit[c] && !vis[c] {
            vis[c] = c
                .neighbors8()
                .any(|n| terrain.in_bounds(n) && vis[n] && lit[n] && !terrain[n].is_opaque());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(w: usize, h: usize) -> Grid<Terrain> {
        let mut g = Grid::new(w, h, Terrain::WallH);
        for y in 1..h as i32 - 1 {
            for x in 1..w as i32 - 1 {
                g[Coord::new(x, y)] = Terrain::Floor;
            }
        }
        g
    }

    #[test]
    fn dark_room_sees_neighbours_only() {
        let t = room(9, 9);
        let lit = Grid::new(9, 9, false);
        let v = compute_fov(&t, &lit, Coord::new(4, 4));
        assert_eq!(v.as_slice().iter().filter(|b| **b).count(), 9);
    }

    #[test]
    fn lit_room_fully_visible() {
        let t = room(9, 7);
        let lit = Grid::new(9, 7, true);
        let v = compute_fov(&t, &lit, Coord::new(2, 2));
        assert!(v.as_slice().iter().all(|b| *b));
    }

    #[test]
    fn wall_hides_far_side() {
        let mut t = room(11, 5);
        for y in 0..5 {
            t[Coord::new(5, y)] = Terrain::WallV;
        }
        let lit = Grid::new(11, 5, true);
        let v = compute_fov(&t, &lit, Coord::new(2, 2));
        assert!(v[Coord::new(5, 2)]);
        assert!(!v[Coord::new(7, 2)]);
    }
}
