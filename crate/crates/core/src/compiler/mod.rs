//! Evaluates a des document into a concrete [`LevelBlueprint`].
//!
//! Coordinates in the source are local to the current frame: the whole
//! canvas, the MAP block once one is placed, or a room interior inside a
//! ROOM/SUBROOM body.

pub mod blueprint;
pub mod eval;
pub mod maze;
pub mod rooms;
pub mod select;
pub mod validate;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::dsl::{
    Atom, Command, CoordExpr, DesDocument, DoorState, EntitySpec, HAlign, LevelKind, LitFlag,
    ObjectExtra, RectLit, SelectionExpr, SourceSpan, Stmt, Target, TerrainValue, VAlign,
    ValueExpr, Wall,
};
use crate::geom::{Coord, Grid, Rect, MAP_HEIGHT, MAP_WIDTH};
use crate::rng::GameRng;
use crate::terrain::Terrain;

pub use blueprint::{LevelBlueprint, Placement, PlacementKind, Stair};
pub use eval::{EvalContext, Value};
pub use validate::{validate_blueprint, Issue, Requirements};

/// Cap on rejection sampling for a random placement.
pub const PLACEMENT_ATTEMPTS: usize = 1000;
/// Cap on whole-layout resampling when rooms cannot be placed or joined.
pub const LAYOUT_RETRIES: usize = 100;
const MAX_LOOP: i64 = 10_000;

pub const TRAP_NAMES: [&str; 3] = ["teleport", "fire", "hole"];
const RANDOM_TRAPS: [&str; 2] = ["teleport", "fire"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileErrorKind {
    #[error("no level named `{name}`")]
    UnknownLevel { name: String },
    #[error("unknown entity `{name}`")]
    UnknownEntity { name: String },
    #[error("unknown terrain character {ch:?}")]
    UnknownTerrain { ch: char },
    #[error("variable `${name}` is not bound")]
    UnboundVariable { name: String },
    #[error("expected {expected}, found {found}")]
    TypeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("index {index} out of range for `${name}` of length {len}")]
    IndexOutOfRange { name: String, index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("coordinate {coord} is out of bounds")]
    OutOfBounds { coord: Coord },
    #[error("no free cell for {what}")]
    NoFreeCell { what: String },
    #[error("map of {width}x{height} does not fit the canvas")]
    MapTooLarge { width: usize, height: usize },
    #[error("maze region {width}x{height} is smaller than 3x3")]
    RegionTooSmall { width: i32, height: i32 },
    #[error("could not place {what}")]
    PlacementFailure { what: String },
    #[error("could not connect rooms")]
    ConnectFailure,
    #[error("{what} is not allowed here")]
    Misplaced { what: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct CompileError {
    pub span: Option<SourceSpan>,
    pub reason: CompileErrorKind,
}

impl std::fmt::Display for CompileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

impl From<CompileErrorKind> for CompileError {
    fn from(reason: CompileErrorKind) -> Self {
        CompileError { span: None, reason }
    }
}

fn at(span: SourceSpan) -> impl Fn(CompileErrorKind) -> CompileError {
    move |reason| CompileError {
        span: Some(span),
        reason,
    }
}

/// Compiles `level_name` of `doc` with the given seed.
pub fn compile(doc: &DesDocument, level_name: &str, seed: u64) -> Result<LevelBlueprint, CompileError> {
    compile_with(doc, level_name, seed, Catalog::builtin())
}

/// Compiles the first level of `doc`.
pub fn compile_first(doc: &DesDocument, seed: u64) -> Result<LevelBlueprint, CompileError> {
    let name = doc
        .levels
        .first()
        .map(|l| l.kind.name().to_string())
        .unwrap_or_default();
    compile(doc, &name, seed)
}

pub fn compile_with(
    doc: &DesDocument,
    level_name: &str,
    seed: u64,
    catalog: &Catalog,
) -> Result<LevelBlueprint, CompileError> {
    let level = doc
        .level(level_name)
        .ok_or_else(|| CompileErrorKind::UnknownLevel {
            name: level_name.to_string(),
        })?;
    let mut reseed = GameRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut last = None;
    for attempt in 0..LAYOUT_RETRIES {
        let rng = if attempt == 0 {
            GameRng::new(seed)
        } else {
            reseed.fork()
        };
        let fill = match &level.kind {
            LevelKind::Maze { fill, .. } => {
                Terrain::from_map_char(*fill).ok_or(CompileErrorKind::UnknownTerrain { ch: *fill })?
            }
            LevelKind::Room { .. } => Terrain::Solid,
        };
        let mut c = Compiler::new(catalog, rng, level.kind.name(), fill);
        match c.run(&level.commands) {
            Ok(()) => return Ok(c.bp),
            Err(e)
                if matches!(
                    e.reason,
                    CompileErrorKind::PlacementFailure { .. } | CompileErrorKind::ConnectFailure
                ) =>
            {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| CompileErrorKind::ConnectFailure.into()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Slot {
    Monster,
    Object,
    Boulder,
    Trap,
    Feature,
    Start,
}

const OCC_MONSTER: u8 = 1;
const OCC_BOULDER: u8 = 2;
const OCC_OBJECT: u8 = 4;
const OCC_TRAP: u8 = 8;

impl Slot {
    fn bit(self) -> u8 {
        match self {
            Slot::Monster => OCC_MONSTER,
            Slot::Boulder => OCC_BOULDER,
            Slot::Object => OCC_OBJECT,
            Slot::Trap => OCC_TRAP,
            Slot::Feature | Slot::Start => 0,
        }
    }

    fn of(p: &Placement) -> Slot {
        match p.kind {
            PlacementKind::Monster => Slot::Monster,
            PlacementKind::Object if p.name == "boulder" => Slot::Boulder,
            PlacementKind::Object => Slot::Object,
            PlacementKind::Trap => Slot::Trap,
            PlacementKind::Feature => Slot::Feature,
        }
    }

    fn terrain_ok(self, t: Terrain) -> bool {
        match self {
            Slot::Monster | Slot::Object => t.is_walkable(),
            Slot::Boulder => t.is_walkable() && !t.is_door(),
            Slot::Trap | Slot::Feature => t.is_open_floor(),
            Slot::Start => {
                t.is_walkable() && !matches!(t, Terrain::StairUp | Terrain::StairDown)
            }
        }
    }

    fn blocked_by(self, explicit: bool) -> u8 {
        match self {
            Slot::Monster => OCC_MONSTER | OCC_BOULDER,
            Slot::Object if explicit => OCC_BOULDER,
            Slot::Object => OCC_BOULDER | OCC_OBJECT,
            Slot::Boulder => OCC_MONSTER | OCC_BOULDER,
            Slot::Trap => OCC_TRAP | OCC_BOULDER,
            Slot::Feature => 0xff,
            Slot::Start => OCC_MONSTER | OCC_BOULDER | OCC_TRAP,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Slot::Monster => "monster",
            Slot::Object => "object",
            Slot::Boulder => "boulder",
            Slot::Trap => "trap",
            Slot::Feature => "feature",
            Slot::Start => "start position",
        }
    }
}

enum Loc {
    At(Coord),
    Random,
}

struct RoomState {
    inner: Rect,
    parent: Option<usize>,
    children: Vec<Rect>,
}

struct Compiler<'a> {
    catalog: &'a Catalog,
    ctx: EvalContext,
    bp: LevelBlueprint,
    occ: Grid<u8>,
    frame: Rect,
    geometry: (HAlign, VAlign),
    rooms: Vec<RoomState>,
    current_room: Option<usize>,
    branch: Option<Rect>,
}

impl<'a> Compiler<'a> {
    fn new(catalog: &'a Catalog, rng: GameRng, name: &str, fill: Terrain) -> Self {
        let bp = LevelBlueprint::empty(name, fill);
        Compiler {
            catalog,
            ctx: EvalContext::new(rng),
            occ: Grid::new(MAP_WIDTH, MAP_HEIGHT, 0),
            frame: bp.map_area,
            bp,
            geometry: (HAlign::Center, VAlign::Center),
            rooms: Vec::new(),
            current_room: None,
            branch: None,
        }
    }

    fn canvas(&self) -> Rect {
        self.bp.terrain.bounds()
    }

    fn local_bounds(&self) -> Rect {
        Rect::new(0, 0, self.frame.width() - 1, self.frame.height() - 1)
    }

    fn to_canvas(&self, local: Coord) -> Coord {
        local.offset(self.frame.x1, self.frame.y1)
    }

    fn run(&mut self, stmts: &[Stmt]) -> Result<(), CompileError> {
        self.exec_block(stmts)?;
        self.finish().map_err(CompileError::from)
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> Result<(), CompileError> {
        for s in stmts {
            self.exec(s)?;
        }
        Ok(())
    }

    fn exec(&mut self, stmt: &Stmt) -> Result<(), CompileError> {
        let err = at(stmt.span);
        match &stmt.cmd {
            Command::Map { rows } => self.place_map(rows).map_err(err),
            Command::Geometry { h, v } => {
                self.geometry = (*h, *v);
                Ok(())
            }
            Command::Region { rect, lit, .. } => {
                let lit = self.lit_flag(*lit);
                let r = self.local_rect(rect);
                for c in r.cells() {
                    let c = self.to_canvas(c);
                    self.bp.lit[c] = lit;
                }
                Ok(())
            }
            Command::Terrain { target, value } => self.set_terrain(target, value).map_err(err),
            Command::ReplaceTerrain {
                rect,
                from,
                to,
                percent,
            } => self.replace_terrain(rect, *from, *to, percent).map_err(err),
            Command::Mazewalk { at: entry, dir } => {
                let entry = match self.coord(entry).map_err(&err)? {
                    Loc::At(c) => c,
                    Loc::Random => self.random_in_frame(),
                };
                maze::mazewalk(
                    &mut self.bp.terrain,
                    self.frame,
                    entry,
                    rooms::outward(*dir),
                    &mut self.ctx.rng,
                )
                .map_err(err)
            }
            Command::RandomCorridors => {
                let tops: Vec<Rect> = self
                    .rooms
                    .iter()
                    .filter(|r| r.parent.is_none())
                    .map(|r| r.inner)
                    .collect();
                rooms::random_corridors(&tops, &mut self.bp.terrain, &mut self.ctx.rng)
                    .map(|_| ())
                    .map_err(err)
            }
            Command::Room {
                lit,
                pos,
                align,
                size,
                body,
                ..
            } => {
                if self.current_room.is_some() {
                    return Err(err(CompileErrorKind::Misplaced { what: "ROOM" }));
                }
                let lit = self.lit_flag(*lit);
                let size = self.room_size(*size);
                let inner = match pos {
                    Some(p) => {
                        let inner = rooms::aligned_room(
                            *p,
                            align.unwrap_or((HAlign::Center, VAlign::Center)),
                            size,
                        );
                        let clash = self
                            .rooms
                            .iter()
                            .filter(|r| r.parent.is_none())
                            .any(|r| r.inner.grow(1).overlaps(&inner.grow(1)));
                        if clash {
                            return Err(err(CompileErrorKind::PlacementFailure {
                                what: "room".into(),
                            }));
                        }
                        inner
                    }
                    None => {
                        let avoid: Vec<Rect> = self
                            .rooms
                            .iter()
                            .filter(|r| r.parent.is_none())
                            .map(|r| r.inner.grow(1))
                            .collect();
                        rooms::random_room(self.canvas(), &avoid, size, &mut self.ctx.rng)
                            .ok_or_else(|| {
                                err(CompileErrorKind::PlacementFailure {
                                    what: "room".into(),
                                })
                            })?
                    }
                };
                self.enter_room(inner, lit, None, body)
            }
            Command::Subroom {
                lit,
                pos,
                size,
                body,
                ..
            } => {
                let Some(parent) = self.current_room else {
                    return Err(err(CompileErrorKind::Misplaced { what: "SUBROOM" }));
                };
                let lit = self.lit_flag(*lit);
                let pinner = self.rooms[parent].inner;
                let size = match size {
                    Some((w, h)) => (*w as i32, *h as i32),
                    None => {
                        let mw = (pinner.width() - 2).clamp(1, rooms::MAX_ROOM);
                        let mh = (pinner.height() - 2).clamp(1, rooms::MAX_ROOM);
                        (
                            self.ctx.rng.range(1.min(mw), mw),
                            self.ctx.rng.range(1.min(mh), mh),
                        )
                    }
                };
                let inner = match pos {
                    Some((x, y)) => Rect::from_origin_size(
                        Coord::new(pinner.x1 + *x as i32, pinner.y1 + *y as i32),
                        size.0,
                        size.1,
                    ),
                    None => {
                        let avoid = self.rooms[parent].children.clone();
                        rooms::random_room(pinner, &avoid, size, &mut self.ctx.rng).ok_or_else(
                            || {
                                err(CompileErrorKind::PlacementFailure {
                                    what: "subroom".into(),
                                })
                            },
                        )?
                    }
                };
                let outer = inner.grow(1);
                if outer.intersect(&pinner) != outer {
                    return Err(err(CompileErrorKind::PlacementFailure {
                        what: "subroom".into(),
                    }));
                }
                self.rooms[parent].children.push(outer);
                self.enter_room(inner, lit, Some(parent), body)
            }
            Command::RoomDoor {
                secret,
                state,
                wall,
                pos,
            } => {
                let Some(room) = self.current_room else {
                    return Err(err(CompileErrorKind::Misplaced { what: "ROOMDOOR" }));
                };
                let inner = self.rooms[room].inner;
                let wall = match wall {
                    Some(w) => *w,
                    None => [Wall::North, Wall::South, Wall::East, Wall::West]
                        [self.ctx.rng.below(4)],
                };
                let cells = rooms::wall_cells(inner, wall);
                let i = match pos {
                    Some(p) => (*p).clamp(0, cells.len() as i64 - 1) as usize,
                    None => self.ctx.rng.below(cells.len()),
                };
                let kind = if *secret {
                    Terrain::SecretDoor
                } else {
                    self.door_terrain(*state)
                };
                self.bp.terrain[cells[i]] = kind;
                Ok(())
            }
            Command::Door { state, at: loc } => {
                let c = match self.coord(loc).map_err(&err)? {
                    Loc::At(c) => c,
                    Loc::Random => self.random_in_frame(),
                };
                if !self.canvas().contains(c) {
                    return Err(err(CompileErrorKind::OutOfBounds { coord: c }));
                }
                self.bp.terrain[c] = self.door_terrain(*state);
                Ok(())
            }
            Command::Monster { spec, at: loc, args } => {
                self.monster(spec, loc, args).map_err(err)
            }
            Command::Object {
                spec,
                at: loc,
                extras,
            } => self.object(spec, loc, extras).map_err(err),
            Command::Trap { name, at: loc } => self.trap(name.as_deref(), loc).map_err(err),
            Command::Stair { at: loc, up } => {
                let t = if *up {
                    Terrain::StairUp
                } else {
                    Terrain::StairDown
                };
                self.feature(t, loc).map_err(err)
            }
            Command::Sink { at: loc } => self.feature(Terrain::Sink, loc).map_err(err),
            Command::Fountain { at: loc } => self.feature(Terrain::Fountain, loc).map_err(err),
            Command::Altar { at: loc, .. } => self.feature(Terrain::Altar, loc).map_err(err),
            Command::Branch { r1, .. } => {
                let r = self.local_rect(r1);
                self.branch = Some(Rect::new(
                    r.x1 + self.frame.x1,
                    r.y1 + self.frame.y1,
                    r.x2 + self.frame.x1,
                    r.y2 + self.frame.y1,
                ));
                Ok(())
            }
            Command::Loop { count, body } => {
                let n = self.ctx.eval_int(count).map_err(&err)?.clamp(0, MAX_LOOP);
                for _ in 0..n {
                    self.exec_block(body)?;
                }
                Ok(())
            }
            Command::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.ctx.eval_condition(cond).map_err(err)? {
                    self.exec_block(then_body)
                } else if let Some(e) = else_body {
                    self.exec_block(e)
                } else {
                    Ok(())
                }
            }
            Command::Assign { name, value } => {
                let v = self.value(value).map_err(err)?;
                self.ctx.set(name, v);
                Ok(())
            }
            Command::Shuffle { name } => self.ctx.shuffle(name).map_err(err),
            Command::Prob { percent, inner } => {
                if self.ctx.rng.percent(*percent) {
                    self.exec(inner)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn enter_room(
        &mut self,
        inner: Rect,
        lit: bool,
        parent: Option<usize>,
        body: &[Stmt],
    ) -> Result<(), CompileError> {
        rooms::draw_room(&mut self.bp.terrain, inner);
        for c in inner.grow(1).cells() {
            if self.bp.lit.in_bounds(c) {
                self.bp.lit[c] = lit;
            }
        }
        if parent.is_none() {
            self.bp.rooms.push(inner.grow(1));
        }
        self.rooms.push(RoomState {
            inner,
            parent,
            children: Vec::new(),
        });
        let saved = (self.frame, self.current_room);
        self.frame = inner;
        self.current_room = Some(self.rooms.len() - 1);
        let result = self.exec_block(body);
        (self.frame, self.current_room) = saved;
        result
    }

    fn room_size(&mut self, size: Option<(i64, i64)>) -> (i32, i32) {
        match size {
            Some((w, h)) => (
                (w as i32).clamp(1, MAP_WIDTH as i32 - 2),
                (h as i32).clamp(1, MAP_HEIGHT as i32 - 2),
            ),
            None => rooms::random_size(&mut self.ctx.rng),
        }
    }

    fn lit_flag(&mut self, flag: LitFlag) -> bool {
        match flag {
            LitFlag::Lit => true,
            LitFlag::Unlit => false,
            LitFlag::Random => self.ctx.rng.percent(50),
        }
    }

    fn door_terrain(&mut self, state: DoorState) -> Terrain {
        match state {
            DoorState::Open => Terrain::OpenDoor,
            DoorState::Closed => Terrain::ClosedDoor,
            DoorState::Locked => Terrain::LockedDoor,
            DoorState::NoDoor | DoorState::Broken => Terrain::Doorway,
            DoorState::Random => {
                [Terrain::Doorway, Terrain::OpenDoor, Terrain::ClosedDoor][self.ctx.rng.below(3)]
            }
        }
    }

    fn local_rect(&self, r: &RectLit) -> Rect {
        Rect::new(r.x1 as i32, r.y1 as i32, r.x2 as i32, r.y2 as i32).intersect(&self.local_bounds())
    }

    fn place_map(&mut self, rows: &[String]) -> Result<(), CompileErrorKind> {
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let height = rows.len();
        if width == 0 || height == 0 || width > MAP_WIDTH || height > MAP_HEIGHT {
            return Err(CompileErrorKind::MapTooLarge { width, height });
        }
        let (w, h) = (width as i32, height as i32);
        let (cw, ch) = (MAP_WIDTH as i32, MAP_HEIGHT as i32);
        let x = match self.geometry.0 {
            HAlign::Left => 1.min(cw - w),
            HAlign::Center => (cw - w) / 2,
            HAlign::Right => (cw - w - 1).max(0),
        };
        let y = match self.geometry.1 {
            VAlign::Top => 1.min(ch - h),
            VAlign::Center => (ch - h) / 2,
            VAlign::Bottom => (ch - h - 1).max(0),
        };
        let area = Rect::from_origin_size(Coord::new(x, y), w, h);
        for (dy, row) in rows.iter().enumerate() {
            let mut chars = row.chars();
            for dx in 0..width {
                let ch = chars.next().unwrap_or(' ');
                let t = Terrain::from_map_char(ch).ok_or(CompileErrorKind::UnknownTerrain { ch })?;
                self.bp.terrain[Coord::new(x + dx as i32, y + dy as i32)] = t;
            }
        }
        self.bp.map_area = area;
        self.frame = area;
        Ok(())
    }

    fn terrain_char(&mut self, value: &TerrainValue) -> Result<Terrain, CompileErrorKind> {
        let ch = match value {
            TerrainValue::Char(c) => *c,
            TerrainValue::Var(access) => match self.ctx.lookup(access)? {
                Value::Char(c) => c,
                Value::Str(s) if s.chars().count() == 1 => s.chars().next().unwrap_or(' '),
                other => {
                    return Err(CompileErrorKind::TypeMismatch {
                        expected: "terrain character",
                        found: other.type_name(),
                    })
                }
            },
        };
        Terrain::from_map_char(ch).ok_or(CompileErrorKind::UnknownTerrain { ch })
    }

    fn set_terrain(&mut self, target: &Target, value: &TerrainValue) -> Result<(), CompileErrorKind> {
        let t = self.terrain_char(value)?;
        let cells: Vec<Coord> = match target {
            Target::Coord(ce) => match self.coord(ce)? {
                Loc::At(c) => vec![c],
                Loc::Random => vec![self.random_in_frame()],
            },
            Target::Selection(sel) => self
                .selection(sel)?
                .into_iter()
                .map(|c| self.to_canvas(c))
                .collect(),
        };
        for c in cells {
            if !self.canvas().contains(c) {
                return Err(CompileErrorKind::OutOfBounds { coord: c });
            }
            self.bp.terrain[c] = t;
        }
        Ok(())
    }

    fn replace_terrain(
        &mut self,
        rect: &RectLit,
        from: char,
        to: char,
        percent: &crate::dsl::IntExpr,
    ) -> Result<(), CompileErrorKind> {
        let from = Terrain::from_map_char(from).ok_or(CompileErrorKind::UnknownTerrain { ch: from })?;
        let to = Terrain::from_map_char(to).ok_or(CompileErrorKind::UnknownTerrain { ch: to })?;
        let percent = self.ctx.eval_int(percent)?;
        let r = self.local_rect(rect);
        for c in r.cells() {
            let c = self.to_canvas(c);
            if self.bp.terrain[c] == from && self.ctx.rng.percent(percent) {
                self.bp.terrain[c] = to;
            }
        }
        Ok(())
    }

    fn selection(&mut self, sel: &SelectionExpr) -> Result<Vec<Coord>, CompileErrorKind> {
        let lb = self.local_bounds();
        let pt = |p: (i64, i64)| Coord::new(p.0 as i32, p.1 as i32);
        let rect = |r: &RectLit| Rect::new(r.x1 as i32, r.y1 as i32, r.x2 as i32, r.y2 as i32);
        Ok(match sel {
            SelectionExpr::FillRect(r) => select::select_fillrect(rect(r), lb),
            SelectionExpr::Rect(r) => select::select_rect(rect(r), lb),
            SelectionExpr::Line(a, b) => select::select_line(pt(*a), pt(*b), lb),
            SelectionExpr::RandLine { p1, p2, roughness } => select::select_randline(
                pt(*p1),
                pt(*p2),
                (*roughness).min(i32::MAX as i64) as i32,
                lb,
                &mut self.ctx.rng,
            ),
            SelectionExpr::Filter { percent, inner } => {
                let cells = self.selection(inner)?;
                select::filter(&cells, *percent, &mut self.ctx.rng)
            }
            SelectionExpr::Union(parts) => {
                let mut all = Vec::new();
                for p in parts {
                    all.extend(self.selection(p)?);
                }
                select::normalize(&mut all);
                all
            }
            SelectionExpr::Var(access) => match self.ctx.lookup(access)? {
                Value::Selection(cells) => cells,
                Value::Coord(c) => vec![c],
                other => {
                    return Err(CompileErrorKind::TypeMismatch {
                        expected: "selection",
                        found: other.type_name(),
                    })
                }
            },
        })
    }

    /// Evaluates a coordinate expression to frame-local coordinates.
    fn local_coord(&mut self, ce: &CoordExpr) -> Result<Option<Coord>, CompileErrorKind> {
        match ce {
            CoordExpr::Absolute { x, y } => Ok(Some(Coord::new(*x as i32, *y as i32))),
            CoordExpr::Random => Ok(None),
            CoordExpr::RndCoord(sel) => {
                let cells = self.selection(sel)?;
                match self.ctx.rng.choose(&cells) {
                    Some(c) => Ok(Some(*c)),
                    None => Err(CompileErrorKind::NoFreeCell {
                        what: "rndcoord".into(),
                    }),
                }
            }
            CoordExpr::Var(access) => match self.ctx.lookup(access)? {
                Value::Coord(c) => Ok(Some(c)),
                Value::Selection(cells) => match self.ctx.rng.choose(&cells) {
                    Some(c) => Ok(Some(*c)),
                    None => Err(CompileErrorKind::NoFreeCell {
                        what: "rndcoord".into(),
                    }),
                },
                other => Err(CompileErrorKind::TypeMismatch {
                    expected: "coordinate",
                    found: other.type_name(),
                }),
            },
        }
    }

    fn coord(&mut self, ce: &CoordExpr) -> Result<Loc, CompileErrorKind> {
        Ok(match self.local_coord(ce)? {
            Some(c) => Loc::At(self.to_canvas(c)),
            None => Loc::Random,
        })
    }

    fn random_in_frame(&mut self) -> Coord {
        let f = self.frame;
        Coord::new(
            self.ctx.rng.range(f.x1, f.x2),
            self.ctx.rng.range(f.y1, f.y2),
        )
    }

    fn value(&mut self, v: &ValueExpr) -> Result<Value, CompileErrorKind> {
        Ok(match v {
            ValueExpr::Int(e) => Value::Int(self.ctx.eval_int(e)?),
            ValueExpr::Char(c) => Value::Char(*c),
            ValueExpr::Str(s) => Value::Str(s.clone()),
            ValueExpr::Coord(ce) => match self.local_coord(ce)? {
                Some(c) => Value::Coord(c),
                None => {
                    let c = self.random_in_frame();
                    Value::Coord(c.offset(-self.frame.x1, -self.frame.y1))
                }
            },
            ValueExpr::Selection(s) => Value::Selection(self.selection(s)?),
            ValueExpr::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.value(i)?);
                }
                Value::Array(out)
            }
            ValueExpr::Var(access) => self.ctx.lookup(access)?,
            ValueExpr::Typed { value, .. } => self.value(value)?,
        })
    }

    fn admits(&self, slot: Slot, c: Coord, explicit: bool) -> bool {
        self.bp.terrain.in_bounds(c)
            && slot.terrain_ok(self.bp.terrain[c])
            && self.occ[c] & slot.blocked_by(explicit) == 0
            && !(slot == Slot::Feature && self.bp.terrain[c].is_feature())
    }

    /// Nearest admissible cell by Chebyshev ring, then Manhattan distance,
    /// then row-major order.
    fn nearest(&self, slot: Slot, from: Coord) -> Option<Coord> {
        let max_r = MAP_WIDTH.max(MAP_HEIGHT) as i32;
        for r in 1..=max_r {
            let best = Rect::new(from.x - r, from.y - r, from.x + r, from.y + r)
                .cells()
                .filter(|c| c.chebyshev(from) == r && self.admits(slot, *c, true))
                .min_by_key(|c| (c.manhattan(from), c.y, c.x));
            if best.is_some() {
                return best;
            }
        }
        None
    }

    fn random_cell(&mut self, slot: Slot) -> Result<Coord, CompileErrorKind> {
        let excluded: Vec<Rect> = self
            .current_room
            .map(|r| self.rooms[r].children.clone())
            .unwrap_or_default();
        for _ in 0..PLACEMENT_ATTEMPTS {
            let c = self.random_in_frame();
            if excluded.iter().any(|r| r.contains(c)) {
                continue;
            }
            if self.admits(slot, c, false) {
                return Ok(c);
            }
        }
        Err(CompileErrorKind::NoFreeCell {
            what: slot.label().to_string(),
        })
    }

    fn place(&mut self, slot: Slot, loc: Loc) -> Result<Coord, CompileErrorKind> {
        match loc {
            Loc::Random => self.random_cell(slot),
            Loc::At(c) => {
                if !self.frame.contains(c) {
                    return Err(CompileErrorKind::OutOfBounds { coord: c });
                }
                if self.admits(slot, c, true) {
                    Ok(c)
                } else {
                    self.nearest(slot, c).ok_or_else(|| CompileErrorKind::NoFreeCell {
                        what: slot.label().to_string(),
                    })
                }
            }
        }
    }

    fn push(&mut self, p: Placement) {
        let bit = Slot::of(&p).bit();
        self.occ[p.pos] |= bit;
        self.bp.placements.push(p);
    }

    fn atom(&mut self, a: &Atom) -> Result<Value, CompileErrorKind> {
        Ok(match a {
            Atom::Char(c) => Value::Char(*c),
            Atom::Str(s) => Value::Str(s.clone()),
            Atom::Var(access) => self.ctx.lookup(access)?,
        })
    }

    /// Splits an entity spec into (class, name) constraints.
    fn entity_parts(
        &mut self,
        spec: &EntitySpec,
    ) -> Result<(Option<char>, Option<String>), CompileErrorKind> {
        let split = |v: Value| -> Result<(Option<char>, Option<String>), CompileErrorKind> {
            match v {
                Value::Char(c) => Ok((Some(c), None)),
                Value::Str(s) => Ok((None, Some(s))),
                other => Err(CompileErrorKind::TypeMismatch {
                    expected: "class character or name",
                    found: other.type_name(),
                }),
            }
        };
        match spec {
            EntitySpec::Random => Ok((None, None)),
            EntitySpec::Class(a) | EntitySpec::Name(a) => {
                let v = self.atom(a)?;
                split(v)
            }
            EntitySpec::ClassName(a, b) => {
                let (class, _) = split(self.atom(a)?)?;
                let (_, name) = split(self.atom(b)?)?;
                Ok((class, name))
            }
        }
    }

    fn monster(&mut self, spec: &EntitySpec, loc: &CoordExpr, args: &[String]) -> Result<(), CompileErrorKind> {
        let (class, name) = self.entity_parts(spec)?;
        let id = resolve_monster(self.catalog, class, name.as_deref(), &mut self.ctx.rng)?;
        let kind = &self.catalog.monsters[id];
        let loc = self.coord(loc)?;
        let pos = self.place(Slot::Monster, loc)?;
        let mut p = Placement::new(PlacementKind::Monster, kind.name.clone(), kind.class, pos);
        p.hostile = kind.hostile;
        for a in args {
            match a.to_ascii_lowercase().as_str() {
                "asleep" | "sleeping" => p.asleep = true,
                "awake" => p.asleep = false,
                "hostile" => p.hostile = true,
                "peaceful" => p.hostile = false,
                _ => {}
            }
        }
        self.push(p);
        Ok(())
    }

    fn object(
        &mut self,
        spec: &EntitySpec,
        loc: &CoordExpr,
        extras: &[ObjectExtra],
    ) -> Result<(), CompileErrorKind> {
        let (class, name) = self.entity_parts(spec)?;
        let id = resolve_object(self.catalog, class, name.as_deref(), &mut self.ctx.rng)?;
        let kind = &self.catalog.objects[id];
        let (oname, oclass) = (kind.name.clone(), kind.class);
        let mut quantity = 1u32;
        let mut montype = None;
        for e in extras {
            match e {
                ObjectExtra::Quantity(q) => quantity = (*q).clamp(1, u32::MAX as i64) as u32,
                ObjectExtra::Montype(a) => {
                    let (mclass, mname) = match self.atom(a)? {
                        Value::Char(c) => (Some(c), None),
                        Value::Str(s) => (None, Some(s)),
                        other => {
                            return Err(CompileErrorKind::TypeMismatch {
                                expected: "monster class or name",
                                found: other.type_name(),
                            })
                        }
                    };
                    let m = resolve_monster(self.catalog, mclass, mname.as_deref(), &mut self.ctx.rng)?;
                    montype = Some(self.catalog.monsters[m].name.clone());
                }
                ObjectExtra::Flag(_) => {}
            }
        }
        let slot = if oname == "boulder" {
            Slot::Boulder
        } else {
            Slot::Object
        };
        let loc = self.coord(loc)?;
        let pos = self.place(slot, loc)?;
        let mut p = Placement::new(PlacementKind::Object, oname, oclass, pos);
        p.quantity = quantity;
        p.montype = montype;
        self.push(p);
        Ok(())
    }

    fn trap(&mut self, name: Option<&str>, loc: &CoordExpr) -> Result<(), CompileErrorKind> {
        let name = match name {
            Some(n) => canonical_trap(n).ok_or_else(|| CompileErrorKind::UnknownEntity {
                name: n.to_string(),
            })?,
            None => RANDOM_TRAPS[self.ctx.rng.below(RANDOM_TRAPS.len())],
        };
        let loc = self.coord(loc)?;
        let pos = self.place(Slot::Trap, loc)?;
        self.push(Placement::new(PlacementKind::Trap, name, '^', pos));
        Ok(())
    }

    fn feature(&mut self, t: Terrain, loc: &CoordExpr) -> Result<(), CompileErrorKind> {
        let pos = match self.coord(loc)? {
            Loc::At(c) => {
                if !self.frame.contains(c) {
                    return Err(CompileErrorKind::OutOfBounds { coord: c });
                }
                c
            }
            Loc::Random => self.random_cell(Slot::Feature)?,
        };
        self.bp.terrain[pos] = t;
        Ok(())
    }

    /// Settles the start position, repairs placements whose terrain was
    /// overwritten by later commands, and records features and stairs.
    fn finish(&mut self) -> Result<(), CompileErrorKind> {
        let placements = std::mem::take(&mut self.bp.placements);
        self.occ.fill(0);
        for mut p in placements {
            let slot = Slot::of(&p);
            if !self.admits(slot, p.pos, true) {
                p.pos = self.nearest(slot, p.pos).ok_or_else(|| CompileErrorKind::NoFreeCell {
                    what: slot.label().to_string(),
                })?;
            }
            self.push(p);
        }

        let start = if let Some(r) = self.branch {
            let cands: Vec<Coord> = r.cells().filter(|&c| self.admits(Slot::Start, c, true)).collect();
            match self.ctx.rng.choose(&cands) {
                Some(c) => *c,
                None => self.nearest(Slot::Start, Coord::new(r.x1, r.y1)).ok_or_else(|| {
                    CompileErrorKind::NoFreeCell {
                        what: "start position".into(),
                    }
                })?,
            }
        } else if let Some(up) = self
            .bp
            .terrain
            .coords()
            .find(|&c| self.bp.terrain[c] == Terrain::StairUp)
        {
            if self.occ[up] & (OCC_MONSTER | OCC_BOULDER) == 0 {
                up
            } else {
                self.nearest(Slot::Start, up).ok_or_else(|| CompileErrorKind::NoFreeCell {
                    what: "start position".into(),
                })?
            }
        } else {
            self.frame = self.bp.map_area;
            self.current_room = None;
            self.random_cell(Slot::Start)?
        };
        self.bp.start_pos = Some(start);

        let mut stairs = Vec::new();
        let mut features = Vec::new();
        for c in self.bp.terrain.coords() {
            let t = self.bp.terrain[c];
            match t {
                Terrain::StairUp => stairs.push(Stair { pos: c, up: true }),
                Terrain::StairDown => stairs.push(Stair { pos: c, up: false }),
                _ => {}
            }
            if t.is_feature() {
                features.push(Placement::new(PlacementKind::Feature, t.name(), t.map_char(), c));
            }
        }
        self.bp.stairs = stairs;
        self.bp.placements.extend(features);
        Ok(())
    }
}

/// Canonical name of a trap, accepting the usual aliases.
pub fn canonical_trap(name: &str) -> Option<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "teleport" | "teleportation" | "teleportation trap" | "teleport trap" => Some("teleport"),
        "fire" | "fire trap" => Some("fire"),
        "hole" | "trap door" | "trapdoor" => Some("hole"),
        _ => None,
    }
}

fn unknown(class: Option<char>, name: Option<&str>) -> CompileErrorKind {
    let name = match (class, name) {
        (Some(c), Some(n)) => format!("('{c}', \"{n}\")"),
        (None, Some(n)) => n.to_string(),
        (Some(c), None) => format!("class '{c}'"),
        (None, None) => "random".to_string(),
    };
    CompileErrorKind::UnknownEntity { name }
}

/// Resolves a monster spec against the catalog: a name is looked up (and
/// must match the class when both are given), a class alone picks uniformly
/// within the class, and neither picks uniformly from the whole bestiary.
pub fn resolve_monster(
    catalog: &Catalog,
    class: Option<char>,
    name: Option<&str>,
    rng: &mut GameRng,
) -> Result<usize, CompileErrorKind> {
    match name {
        Some(n) => catalog
            .monster_by_name(n)
            .filter(|&id| class.is_none_or(|c| catalog.monsters[id].class == c))
            .ok_or_else(|| unknown(class, name)),
        None => catalog
            .random_monster(class, rng)
            .ok_or_else(|| unknown(class, name)),
    }
}

/// Object counterpart of [`resolve_monster`].
pub fn resolve_object(
    catalog: &Catalog,
    class: Option<char>,
    name: Option<&str>,
    rng: &mut GameRng,
) -> Result<usize, CompileErrorKind> {
    match name {
        Some(n) => catalog
            .object_by_name(n, class)
            .ok_or_else(|| unknown(class, name)),
        None => catalog
            .random_object(class, rng)
            .ok_or_else(|| unknown(class, name)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;

    fn build(src: &str, seed: u64) -> LevelBlueprint {
        let doc = parse_document(src).unwrap();
        compile_first(&doc, seed).unwrap()
    }

    #[test]
    fn trivial_map() {
        let bp = build("MAZE: \"t\", ' '\nMAP\n...\n...\n...\nENDMAP\n", 0);
        let floor = bp.terrain.as_slice().iter().filter(|t| **t == Terrain::Floor).count();
        assert_eq!(floor, 9);
        assert_eq!(bp.map_area, Rect::new(38, 9, 40, 11));
        assert!(bp.placements.is_empty());
    }

    #[test]
    fn same_seed_same_blueprint() {
        let src = include_str!("../../data/des/simple_maze.des");
        assert_eq!(build(src, 17), build(src, 17));
    }

    #[test]
    fn unknown_monster_name() {
        let doc = parse_document("MAZE: \"t\", ' '\nMAP\n...\nENDMAP\nMONSTER: ('A', \"minotaur\"), (1,0)\n").unwrap();
        let err = compile_first(&doc, 0).unwrap_err();
        assert!(matches!(err.reason, CompileErrorKind::UnknownEntity { .. }));
        assert_eq!(err.span.map(|s| s.line), Some(5));
    }

    #[test]
    fn out_of_bounds_coordinate() {
        let doc = parse_document("MAZE: \"t\", ' '\nMAP\n...\nENDMAP\nMONSTER: 'F', (5,0)\n").unwrap();
        let err = compile_first(&doc, 0).unwrap_err();
        assert!(matches!(err.reason, CompileErrorKind::OutOfBounds { .. }));
    }

    #[test]
    fn unknown_level() {
        let doc = parse_document("MAZE: \"t\", ' '\n").unwrap();
        let err = compile(&doc, "nope", 0).unwrap_err();
        assert!(matches!(err.reason, CompileErrorKind::UnknownLevel { .. }));
    }

    #[test]
    fn lichen_resolves() {
        let bp = build("MAZE: \"t\", ' '\nMAP\n...\nENDMAP\nMONSTER: ('F',\"lichen\"), (1,0)\n", 0);
        let m = bp.placements_of(PlacementKind::Monster).next().unwrap();
        assert_eq!((m.name.as_str(), m.class), ("lichen", 'F'));
    }

    #[test]
    fn name_only_gets_class() {
        let mut rng = GameRng::new(0);
        let id = resolve_monster(Catalog::builtin(), None, Some("minotaur"), &mut rng).unwrap();
        assert_eq!(Catalog::builtin().monsters[id].class, 'H');
    }

    #[test]
    fn fixed_room_placed_exactly() {
        let bp = build("LEVEL: \"r\"\nROOM: \"ordinary\", lit, (3,3), (center,center), (11,9) {\n}\n", 0);
        assert_eq!(bp.rooms, vec![Rect::new(32, 5, 44, 15)]);
    }
}
