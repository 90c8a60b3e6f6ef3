//! Programmatic construction of des-file source.
//!
//! ```
//! use hackbox::builder::LevelBuilder;
//!
//! let mut lvl = LevelBuilder::new(10, 10);
//! lvl.add_object("apple", Some('%'), None).unwrap();
//! lvl.add_monster("goblin", None, &[]).unwrap();
//! let des = lvl.get_des();
//! assert!(hackbox::dsl::parse_document(&des).is_ok());
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::dsl::{parse_document, DoorState};
use crate::geom::{Coord, MAP_HEIGHT, MAP_WIDTH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuilderError {
    #[error("coordinate {coord} is outside the {width}x{height} map")]
    OutOfBounds {
        coord: Coord,
        width: usize,
        height: usize,
    },
    #[error("map must be between 1x1 and {}x{}", MAP_WIDTH, MAP_HEIGHT)]
    BadSize,
    #[error("invalid name {0:?}")]
    BadName(String),
}

/// Outline, filled rectangle, or straight line.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Rect,
    FillRect,
    Line,
}

impl Shape {
    pub fn from_name(s: &str) -> Option<Shape> {
        match s {
            "rect" => Some(Shape::Rect),
            "fillrect" => Some(Shape::FillRect),
            "line" => Some(Shape::Line),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LevelBuilder {
    rows: Vec<String>,
    width: usize,
    height: usize,
    lines: Vec<String>,
    start: Option<Coord>,
}

fn place(p: Option<Coord>) -> String {
    match p {
        Some(c) => format!("({},{})", c.x, c.y),
        None => "random".to_string(),
    }
}

fn quoted(name: &str) -> Result<String, BuilderError> {
    if name.is_empty() || name.contains('"') || name.contains('\n') {
        return Err(BuilderError::BadName(name.to_string()));
    }
    Ok(format!("\"{name}\""))
}

fn class_char(c: char) -> Result<String, BuilderError> {
    if c == '\'' || c == '\n' || c.is_whitespace() {
        return Err(BuilderError::BadName(c.to_string()));
    }
    Ok(format!("'{c}'"))
}

impl LevelBuilder {
    /// An empty lit room of `w` x `h` floor cells.
    pub fn new(w: usize, h: usize) -> Self {
        let w = w.clamp(1, MAP_WIDTH);
        let h = h.clamp(1, MAP_HEIGHT);
        Self::with_rows(vec![".".repeat(w); h])
    }

    /// Uses a fixed map given as text. Blank leading and trailing lines are ignored.
    pub fn from_map(text: &str) -> Result<Self, BuilderError> {
        let rows: Vec<String> = text
            .lines()
            .map(|l| l.trim_end_matches('\r').to_string())
            .skip_while(|l| l.trim().is_empty())
            .collect();
        let end = rows
            .iter()
            .rposition(|l| !l.trim().is_empty())
            .map_or(0, |i| i + 1);
        let rows = rows[..end].to_vec();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        if rows.is_empty() || width == 0 || width > MAP_WIDTH || rows.len() > MAP_HEIGHT {
            return Err(BuilderError::BadSize);
        }
        Ok(Self::with_rows(rows))
    }

    fn with_rows(rows: Vec<String>) -> Self {
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        LevelBuilder {
            height: rows.len(),
            width,
            rows,
            lines: Vec::new(),
            start: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn check(&self, p: Option<Coord>) -> Result<(), BuilderError> {
        match p {
            Some(c)
                if c.x < 0
                    || c.y < 0
                    || c.x as usize >= self.width
                    || c.y as usize >= self.height =>
            {
                Err(BuilderError::OutOfBounds {
                    coord: c,
                    width: self.width,
                    height: self.height,
                })
            }
            _ => Ok(()),
        }
    }

    fn push(&mut self, p: Option<Coord>, line: String) -> Result<&mut Self, BuilderError> {
        self.check(p)?;
        self.lines.push(line);
        Ok(self)
    }

    /// Adds an object by name, class, or both; an empty name picks randomly within the class.
    pub fn add_object(
        &mut self,
        name: &str,
        class: Option<char>,
        at: Option<Coord>,
    ) -> Result<&mut Self, BuilderError> {
        let spec = match (class, name.is_empty()) {
            (Some(c), true) => class_char(c)?,
            (Some(c), false) => format!("({}, {})", class_char(c)?, quoted(name)?),
            (None, true) => "random".to_string(),
            (None, false) => quoted(name)?,
        };
        self.push(at, format!("OBJECT:{spec},{}", place(at)))
    }

    /// Adds a monster by name (empty for random) with optional flags such as
    /// `asleep` or `peaceful`.
    pub fn add_monster(
        &mut self,
        name: &str,
        at: Option<Coord>,
        args: &[&str],
    ) -> Result<&mut Self, BuilderError> {
        let spec = if name.is_empty() {
            "random".to_string()
        } else {
            let catalog = Catalog::builtin();
            match catalog.monster_by_name(name) {
                Some(id) => format!(
                    "({}, {})",
                    class_char(catalog.monsters[id].class)?,
                    quoted(&catalog.monsters[id].name)?
                ),
                None => quoted(name)?,
            }
        };
        let mut line = format!("MONSTER:{spec},{}", place(at));
        for a in args {
            if a.is_empty() || !a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(BuilderError::BadName(a.to_string()));
            }
            let _ = write!(line, ",{a}");
        }
        self.push(at, line)
    }

    pub fn add_trap(&mut self, name: &str, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        let spec = if name.is_empty() {
            "random".to_string()
        } else {
            quoted(name)?
        };
        self.push(at, format!("TRAP:{spec},{}", place(at)))
    }

    pub fn add_sink(&mut self, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        self.push(at, format!("SINK:{}", place(at)))
    }

    pub fn add_fountain(&mut self, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        self.push(at, format!("FOUNTAIN:{}", place(at)))
    }

    pub fn add_altar(&mut self, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        self.push(at, format!("ALTAR:{},neutral,altar", place(at)))
    }

    pub fn add_door(&mut self, state: DoorState, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        let s = match state {
            DoorState::Open => "open",
            DoorState::Closed => "closed",
            DoorState::Locked => "locked",
            DoorState::NoDoor => "nodoor",
            DoorState::Broken => "broken",
            DoorState::Random => "random",
        };
        self.push(at, format!("DOOR:{s},{}", place(at)))
    }

    /// Paints terrain `ch` over a shape spanning `from`..`to`.
    pub fn fill_terrain(
        &mut self,
        shape: Shape,
        ch: char,
        from: Coord,
        to: Coord,
    ) -> Result<&mut Self, BuilderError> {
        self.check(Some(from))?;
        self.check(Some(to))?;
        let ch = class_char(ch)?;
        let sel = match shape {
            Shape::Line => format!("line ({},{}),({},{})", from.x, from.y, to.x, to.y),
            Shape::Rect | Shape::FillRect => {
                let kw = if shape == Shape::Rect { "rect" } else { "fillrect" };
                format!(
                    "{kw} ({},{},{},{})",
                    from.x.min(to.x),
                    from.y.min(to.y),
                    from.x.max(to.x),
                    from.y.max(to.y)
                )
            }
        };
        self.push(None, format!("TERRAIN:{sel},{ch}"))
    }

    pub fn set_start_pos(&mut self, at: Coord) -> Result<&mut Self, BuilderError> {
        self.check(Some(at))?;
        self.start = Some(at);
        Ok(self)
    }

    /// Places the down staircase that ends the episode by default.
    pub fn add_goal_pos(&mut self, at: Option<Coord>) -> Result<&mut Self, BuilderError> {
        self.push(at, format!("STAIR:{},down", place(at)))
    }

    /// Renders the level as des-file source.
    pub fn get_des(&self) -> String {
        let mut out = String::new();
        out.push_str("MAZE: \"mylevel\", ' '\nGEOMETRY:center,center\nMAP\n");
        for r in &self.rows {
            let pad = self.width - r.chars().count();
            let _ = writeln!(out, "{r}{}", " ".repeat(pad));
        }
        out.push_str("ENDMAP\n");
        let _ = writeln!(
            out,
            "REGION:(0,0,{},{}),lit,\"ordinary\"",
            self.width - 1,
            self.height - 1
        );
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        if let Some(s) = self.start {
            let _ = writeln!(out, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", s.x, s.y);
        }
        if let Err(e) = parse_document(&out) {
            panic!("builder emitted unparsable source ({e}):\n{out}");
        }
        out
    }
}
