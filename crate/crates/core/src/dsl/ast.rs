//! Syntax tree for des-file programs.
//!
//! Statements carry their source span. Equality on [`Stmt`] ignores spans,
//! so a reprinted and reparsed document compares equal to the original.

use serde::Serialize;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            line,
            column,
            length: length.max(1),
        }
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesDocument {
    pub levels: Vec<LevelDecl>,
}

impl DesDocument {
    pub fn level(&self, name: &str) -> Option<&LevelDecl> {
        self.levels.iter().find(|l| l.kind.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LevelKind {
    Maze { name: String, fill: char },
    Room { name: String },
}

impl LevelKind {
    pub fn name(&self) -> &str {
        match self {
            LevelKind::Maze { name, .. } | LevelKind::Room { name } => name,
        }
    }
}

/// Name given to the level of a document that has no header line.
pub const IMPLICIT_LEVEL: &str = "main";
/// Fill character of the implicit level.
pub const IMPLICIT_FILL: char = '.';

#[derive(Clone, Debug, PartialEq)]
pub struct LevelDecl {
    pub kind: LevelKind,
    /// True when the source had no `MAZE`/`LEVEL` header.
    pub implicit: bool,
    pub commands: Vec<Stmt>,
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub span: SourceSpan,
    pub cmd: Command,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.cmd == other.cmd
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Map {
        rows: Vec<String>,
    },
    Geometry {
        h: HAlign,
        v: VAlign,
    },
    Region {
        rect: RectLit,
        lit: LitFlag,
        rtype: String,
    },
    Terrain {
        target: Target,
        value: TerrainValue,
    },
    ReplaceTerrain {
        rect: RectLit,
        from: char,
        to: char,
        percent: IntExpr,
    },
    Mazewalk {
        at: CoordExpr,
        dir: Wall,
    },
    RandomCorridors,
    Room {
        rtype: String,
        lit: LitFlag,
        pos: Option<(i64, i64)>,
        align: Option<(HAlign, VAlign)>,
        size: Option<(i64, i64)>,
        body: Vec<Stmt>,
    },
    Subroom {
        rtype: String,
        lit: LitFlag,
        pos: Option<(i64, i64)>,
        size: Option<(i64, i64)>,
        body: Vec<Stmt>,
    },
    RoomDoor {
        secret: bool,
        state: DoorState,
        wall: Option<Wall>,
        pos: Option<i64>,
    },
    Door {
        state: DoorState,
        at: CoordExpr,
    },
    Monster {
        spec: EntitySpec,
        at: CoordExpr,
        args: Vec<String>,
    },
    Object {
        spec: EntitySpec,
        at: CoordExpr,
        extras: Vec<ObjectExtra>,
    },
    Trap {
        name: Option<String>,
        at: CoordExpr,
    },
    Stair {
        at: CoordExpr,
        up: bool,
    },
    Sink {
        at: CoordExpr,
    },
    Fountain {
        at: CoordExpr,
    },
    Altar {
        at: CoordExpr,
        align: String,
        atype: String,
    },
    Branch {
        r1: RectLit,
        r2: RectLit,
    },
    Loop {
        count: IntExpr,
        body: Vec<Stmt>,
    },
    If {
        cond: CondExpr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    Assign {
        name: String,
        value: ValueExpr,
    },
    Shuffle {
        name: String,
    },
    Prob {
        percent: i64,
        inner: Box<Stmt>,
    },
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Map { .. } => "MAP",
            Command::Geometry { .. } => "GEOMETRY",
            Command::Region { .. } => "REGION",
            Command::Terrain { .. } => "TERRAIN",
            Command::ReplaceTerrain { .. } => "REPLACE_TERRAIN",
            Command::Mazewalk { .. } => "MAZEWALK",
            Command::RandomCorridors => "RANDOM_CORRIDORS",
            Command::Room { .. } => "ROOM",
            Command::Subroom { .. } => "SUBROOM",
            Command::RoomDoor { .. } => "ROOMDOOR",
            Command::Door { .. } => "DOOR",
            Command::Monster { .. } => "MONSTER",
            Command::Object { .. } => "OBJECT",
            Command::Trap { .. } => "TRAP",
            Command::Stair { .. } => "STAIR",
            Command::Sink { .. } => "SINK",
            Command::Fountain { .. } => "FOUNTAIN",
            Command::Altar { .. } => "ALTAR",
            Command::Branch { .. } => "BRANCH",
            Command::Loop { .. } => "LOOP",
            Command::If { .. } => "IF",
            Command::Assign { .. } => "=",
            Command::Shuffle { .. } => "SHUFFLE",
            Command::Prob { .. } => "[%]",
        }
    }

    /// Nested statement lists, in source order.
    pub fn bodies(&self) -> Vec<&[Stmt]> {
        match self {
            Command::Room { body, .. } | Command::Subroom { body, .. } | Command::Loop { body, .. } => {
                vec![body]
            }
            Command::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v: Vec<&[Stmt]> = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            Command::Prob { inner, .. } => vec![std::slice::from_ref(inner)],
            _ => vec![],
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RectLit {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum HAlign {
    Left,
    Center,
    Right,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VAlign {
    Top,
    Center,
    Bottom,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LitFlag {
    Lit,
    Unlit,
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Wall {
    North,
    South,
    East,
    West,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DoorState {
    Open,
    Closed,
    Locked,
    NoDoor,
    Broken,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarAccess {
    pub name: String,
    pub index: Option<Box<IntExpr>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntExpr {
    Literal(i64),
    Dice { n: u32, m: u32 },
    Var(VarAccess),
    Arith {
        op: ArithOp,
        lhs: Box<IntExpr>,
        rhs: Box<IntExpr>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CondExpr {
    Percent(IntExpr),
    Compare {
        lhs: IntExpr,
        op: CmpOp,
        rhs: IntExpr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoordExpr {
    Absolute { x: i64, y: i64 },
    Random,
    RndCoord(Box<SelectionExpr>),
    Var(VarAccess),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectionExpr {
    FillRect(RectLit),
    Rect(RectLit),
    Line((i64, i64), (i64, i64)),
    RandLine {
        p1: (i64, i64),
        p2: (i64, i64),
        roughness: i64,
    },
    Filter {
        percent: i64,
        inner: Box<SelectionExpr>,
    },
    Union(Vec<SelectionExpr>),
    Var(VarAccess),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Coord(CoordExpr),
    Selection(SelectionExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TerrainValue {
    Char(char),
    Var(VarAccess),
}

/// A literal or variable-backed char/string slot.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Char(char),
    Str(String),
    Var(VarAccess),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntitySpec {
    Random,
    Class(Atom),
    Name(Atom),
    ClassName(Atom, Atom),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectExtra {
    Montype(Atom),
    Quantity(i64),
    Flag(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValueExpr {
    Int(IntExpr),
    Char(char),
    Str(String),
    Coord(CoordExpr),
    Selection(SelectionExpr),
    Array(Vec<ValueExpr>),
    Var(VarAccess),
    Typed {
        prefix: String,
        value: Box<ValueExpr>,
    },
}

/// Visits every statement in the document depth-first.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        for body in s.cmd.bodies() {
            walk_stmts(body, f);
        }
    }
}
