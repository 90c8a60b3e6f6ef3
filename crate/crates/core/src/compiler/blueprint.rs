use serde::Serialize;

use crate::geom::{Coord, Grid, Rect, MAP_HEIGHT, MAP_WIDTH};
use crate::terrain::Terrain;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PlacementKind {
    Monster,
    Object,
    Trap,
    Feature,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Placement {
    pub kind: PlacementKind,
    /// Catalog name, trap name, or feature terrain name.
    pub name: String,
    pub class: char,
    /// Canvas coordinates.
    pub pos: Coord,
    pub asleep: bool,
    pub hostile: bool,
    pub quantity: u32,
    pub montype: Option<String>,
}

impl Placement {
    pub fn new(kind: PlacementKind, name: impl Into<String>, class: char, pos: Coord) -> Self {
        Placement {
            kind,
            name: name.into(),
            class,
            pos,
            asleep: false,
            hostile: false,
            quantity: 1,
            montype: None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stair {
    pub pos: Coord,
    pub up: bool,
}

/// A concrete level: one sample from the distribution a des-file describes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelBlueprint {
    pub name: String,
    pub terrain: Grid<Terrain>,
    pub lit: Grid<bool>,
    pub placements: Vec<Placement>,
    pub start_pos: Option<Coord>,
    pub stairs: Vec<Stair>,
    /// Canvas rectangle of the MAP block (the whole canvas when there is none).
    pub map_area: Rect,
    /// Outer rectangles (walls included) of top-level rooms.
    pub rooms: Vec<Rect>,
}

impl LevelBlueprint {
    pub fn empty(name: &str, fill: Terrain) -> Self {
        LevelBlueprint {
            name: name.to_string(),
            terrain: Grid::new(MAP_WIDTH, MAP_HEIGHT, fill),
            lit: Grid::new(MAP_WIDTH, MAP_HEIGHT, false),
            placements: Vec::new(),
            start_pos: None,
            stairs: Vec::new(),
            map_area: Rect::new(0, 0, MAP_WIDTH as i32 - 1, MAP_HEIGHT as i32 - 1),
            rooms: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.terrain.width()
    }

    pub fn height(&self) -> usize {
        self.terrain.height()
    }

    pub fn placements_of(&self, kind: PlacementKind) -> impl Iterator<Item = &Placement> {
        self.placements.iter().filter(move |p| p.kind == kind)
    }

    pub fn count(&self, kind: PlacementKind) -> usize {
        self.placements_of(kind).count()
    }

    pub fn stair_down(&self) -> Option<Coord> {
        self.stairs.iter().find(|s| !s.up).map(|s| s.pos)
    }

    /// Text rendering of terrain with placements overlaid, one row per line.
    pub fn render(&self) -> String {
        let mut rows: Vec<Vec<char>> = (0..self.height())
            .map(|y| {
                self.terrain
                    .row(y)
                    .iter()
                    .map(|t| t.glyph().0)
                    .collect()
            })
            .collect();
        for p in &self.placements {
            let c = match p.kind {
                PlacementKind::Monster => p.class,
                PlacementKind::Object if p.name == "boulder" => '0',
                PlacementKind::Object => p.class,
                PlacementKind::Trap => '^',
                PlacementKind::Feature => continue,
            };
            rows[p.pos.y as usize][p.pos.x as usize] = c;
        }
        if let Some(s) = self.start_pos {
            rows[s.y as usize][s.x as usize] = '@';
        }
        rows.into_iter()
            .map(|r| r.into_iter().collect::<String>().trim_end().to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}
