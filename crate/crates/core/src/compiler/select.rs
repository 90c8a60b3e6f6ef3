//! Cell selections: rectangles, lines, random-walk lines and filters.
//!
//! All functions work in frame-local coordinates and clamp to `bounds`.

use crate::geom::{bresenham, Coord, Rect};
use crate::rng::GameRng;

const RANDLINE_MAX_DEPTH: u32 = 12;

/// Sorts row-major and removes duplicates.
pub fn normalize(cells: &mut Vec<Coord>) {
    cells.sort_by_key(|c| (c.y, c.x));
    cells.dedup();
}

pub fn clamp(c: Coord, bounds: Rect) -> Coord {
    Coord::new(c.x.clamp(bounds.x1, bounds.x2), c.y.clamp(bounds.y1, bounds.y2))
}

pub fn clamp_rect(r: Rect, bounds: Rect) -> Rect {
    r.intersect(&bounds)
}

pub fn select_fillrect(r: Rect, bounds: Rect) -> Vec<Coord> {
    clamp_rect(r, bounds).cells().collect()
}

/// Outline of `r`; the part outside `bounds` is dropped.
pub fn select_rect(r: Rect, bounds: Rect) -> Vec<Coord> {
    let mut out: Vec<Coord> = r
        .cells()
        .filter(|c| c.x == r.x1 || c.x == r.x2 || c.y == r.y1 || c.y == r.y2)
        .filter(|c| bounds.contains(*c))
        .collect();
    normalize(&mut out);
    out
}

pub fn select_line(p1: Coord, p2: Coord, bounds: Rect) -> Vec<Coord> {
    let mut out = bresenham(clamp(p1, bounds), clamp(p2, bounds));
    normalize(&mut out);
    out
}

/// Random-walk line by recursive midpoint displacement. The midpoint of each
/// segment is pushed sideways by a uniform offset in `[-roughness, roughness]`
/// and both halves recurse with half the roughness; short segments are
/// rasterized. The result is 8-connected and contains both endpoints.
pub fn select_randline(
    p1: Coord,
    p2: Coord,
    roughness: i32,
    bounds: Rect,
    rng: &mut GameRng,
) -> Vec<Coord> {
    let mut out = Vec::new();
    randline_rec(
        clamp(p1, bounds),
        clamp(p2, bounds),
        roughness.max(0),
        0,
        bounds,
        rng,
        &mut out,
    );
    normalize(&mut out);
    out
}

fn randline_rec(
    a: Coord,
    b: Coord,
    rough: i32,
    depth: u32,
    bounds: Rect,
    rng: &mut GameRng,
    out: &mut Vec<Coord>,
) {
    if a.chebyshev(b) <= 1 || depth >= RANDLINE_MAX_DEPTH {
        out.extend(bresenham(a, b));
        return;
    }
    let mut m = Coord::new((a.x + b.x).div_euclid(2), (a.y + b.y).div_euclid(2));
    if rough > 0 {
        let j = rng.range(-rough, rough) as f64;
        let (px, py) = (-(b.y - a.y), b.x - a.x);
        let n = px.abs().max(py.abs()) as f64;
        m = m.offset(
            (j * px as f64 / n).round() as i32,
            (j * py as f64 / n).round() as i32,
        );
    }
    let m = clamp(m, bounds);
    if m == a || m == b {
        out.extend(bresenham(a, b));
        return;
    }
    randline_rec(a, m, rough / 2, depth + 1, bounds, rng, out);
    randline_rec(m, b, rough / 2, depth + 1, bounds, rng, out);
}

/// Keeps each cell independently with probability `percent / 100`.
pub fn filter(cells: &[Coord], percent: i64, rng: &mut GameRng) -> Vec<Coord> {
    cells.iter().copied().filter(|_| rng.percent(percent)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canvas() -> Rect {
        Rect::new(0, 0, 78, 20)
    }

    #[test]
    fn straight_randline() {
        let mut rng = GameRng::new(1);
        let cells = select_randline(Coord::new(0, 0), Coord::new(5, 0), 0, canvas(), &mut rng);
        assert_eq!(cells, (0..6).map(|x| Coord::new(x, 0)).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_randline() {
        let mut rng = GameRng::new(1);
        let p = Coord::new(4, 4);
        assert_eq!(select_randline(p, p, 5, canvas(), &mut rng), vec![p]);
    }

    #[test]
    fn randline_stays_in_bounds() {
        let bounds = Rect::new(0, 0, 10, 10);
        for seed in 0..200 {
            let mut rng = GameRng::new(seed);
            let cells = select_randline(Coord::new(0, 0), Coord::new(10, 10), 5, bounds, &mut rng);
            assert!(cells.iter().all(|c| bounds.contains(*c)));
        }
    }

    #[test]
    fn rect_outline() {
        let cells = select_rect(Rect::new(0, 0, 2, 2), canvas());
        assert_eq!(cells.len(), 8);
        assert!(!cells.contains(&Coord::new(1, 1)));
    }

    #[test]
    fn fillrect_clamps() {
        let cells = select_fillrect(Rect::new(0, 0, 11, 9), Rect::new(0, 0, 10, 8));
        assert_eq!(cells.len(), 99);
    }
}
