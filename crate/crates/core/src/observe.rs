//! Symbolic observations of a [`World`].
//!
//! Every observation key is a fixed-shape array. Only the requested keys are
//! built, so agents that read a small crop pay for nothing else.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::geom::{Coord, MAP_HEIGHT, MAP_WIDTH};
use crate::terrain::{color, Terrain};
use crate::world::{TrapKind, World};

pub const STATS_LEN: usize = 25;
pub const MESSAGE_LEN: usize = 256;
pub const INV_SLOTS: usize = 55;
pub const DEFAULT_CROP: usize = 9;

/// Observation keys in canonical order.
pub const KEYS: [&str; 11] = [
    "chars",
    "colors",
    "ids",
    "chars_crop",
    "colors_crop",
    "ids_crop",
    "stats",
    "message",
    "screen_descriptions",
    "inv_letters",
    "inv_strs",
];

const N_TERRAIN: u32 = Terrain::ALL.len() as u32;
/// Number of monster kinds in the shipped catalog.
pub const N_MONSTERS: u32 = 33;
/// Number of object kinds in the shipped catalog.
pub const N_OBJECTS: u32 = 31;
pub const MONSTER_BASE: u32 = N_TERRAIN;
pub const OBJECT_BASE: u32 = MONSTER_BASE + N_MONSTERS;
pub const AGENT_ID: u32 = OBJECT_BASE + N_OBJECTS;
pub const TRAP_BASE: u32 = AGENT_ID + 1;
/// Largest entity id; ids range over `0..=MAX_ID` with 0 meaning nothing seen.
pub const MAX_ID: u32 = TRAP_BASE + TrapKind::ALL.len() as u32 - 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObsError {
    #[error("unknown observation key `{0}`")]
    UnknownKey(String),
    #[error("crop size must be odd and positive, got {0}")]
    BadCrop(usize),
    #[error("cell ({x},{y}) is outside the map")]
    OutOfBounds { x: i32, y: i32 },
}

/// A row-major integer array.
#[derive(Clone, Debug, PartialEq)]
pub struct IntGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<i64>,
}

impl IntGrid {
    pub fn get(&self, x: usize, y: usize) -> i64 {
        self.data[y * self.width + x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.data.chunks(self.width.max(1))
    }
}

impl Serialize for IntGrid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.rows())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObsValue {
    Grid(IntGrid),
    Vector(Vec<i64>),
    /// Zero-padded bytes, serialized as the text before the first zero.
    Bytes(Vec<u8>),
    TextGrid(Vec<Vec<String>>),
    TextList(Vec<String>),
}

impl ObsValue {
    pub fn as_grid(&self) -> Option<&IntGrid> {
        match self {
            ObsValue::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[i64]> {
        match self {
            ObsValue::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// Shape as (rows, columns), or (length, 1) for one-dimensional values.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ObsValue::Grid(g) => (g.height, g.width),
            ObsValue::Vector(v) => (v.len(), 1),
            ObsValue::Bytes(b) => (b.len(), 1),
            ObsValue::TextGrid(g) => (g.len(), g.first().map_or(0, Vec::len)),
            ObsValue::TextList(l) => (l.len(), 1),
        }
    }
}

impl Serialize for ObsValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ObsValue::Grid(g) => g.serialize(s),
            ObsValue::Vector(v) => v.serialize(s),
            ObsValue::Bytes(b) => {
                let end = b.iter().position(|&c| c == 0).unwrap_or(b.len());
                s.serialize_str(&String::from_utf8_lossy(&b[..end]))
            }
            ObsValue::TextGrid(g) => g.serialize(s),
            ObsValue::TextList(l) => l.serialize(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observation {
    pub entries: BTreeMap<&'static str, ObsValue>,
}

impl Observation {
    pub fn get(&self, key: &str) -> Option<&ObsValue> {
        self.entries.get(key)
    }

    /// SHA-256 over a canonical byte encoding of every entry, as hex.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update((k.len() as u64).to_le_bytes());
            h.update(k.as_bytes());
            match v {
                ObsValue::Grid(g) => {
                    h.update([0u8]);
                    h.update((g.width as u64).to_le_bytes());
                    h.update((g.height as u64).to_le_bytes());
                    for x in &g.data {
                        h.update(x.to_le_bytes());
                    }
                }
                ObsValue::Vector(xs) => {
                    h.update([1u8]);
                    h.update((xs.len() as u64).to_le_bytes());
                    for x in xs {
                        h.update(x.to_le_bytes());
                    }
                }
                ObsValue::Bytes(b) => {
                    h.update([2u8]);
                    h.update((b.len() as u64).to_le_bytes());
                    h.update(b);
                }
                ObsValue::TextGrid(g) => {
                    h.update([3u8]);
                    for s in g.iter().flatten() {
                        h.update((s.len() as u64).to_le_bytes());
                        h.update(s.as_bytes());
                    }
                }
                ObsValue::TextList(l) => {
                    h.update([4u8]);
                    for s in l {
                        h.update((s.len() as u64).to_le_bytes());
                        h.update(s.as_bytes());
                    }
                }
            }
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut out, b| {
            let _ = write!(out, "{b:02x}");
            out
        })
    }
}

impl Serialize for Observation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

/// What an observer sees at one cell.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Glyph {
    pub ch: u8,
    pub color: u8,
    pub id: u32,
}

const BLANK: Glyph = Glyph {
    ch: b' ',
    color: 0,
    id: 0,
};

fn terrain_id(t: Terrain) -> u32 {
    Terrain::ALL.iter().position(|&k| k == t).unwrap_or(0) as u32
}

fn trap_glyph(k: TrapKind) -> Glyph {
    let idx = TrapKind::ALL.iter().position(|&t| t == k).unwrap_or(0) as u32;
    let color = match k {
        TrapKind::Teleport => color::MAGENTA,
        TrapKind::Fire => color::ORANGE,
        TrapKind::Hole => color::BROWN,
    };
    Glyph {
        ch: b'^',
        color,
        id: TRAP_BASE + idx,
    }
}

fn ascii(c: char) -> u8 {
    if c.is_ascii() {
        c as u8
    } else {
        b'?'
    }
}

fn boulder_id() -> u32 {
    OBJECT_BASE + Catalog::builtin().object_by_name("boulder", None).unwrap_or(0) as u32
}

/// The glyph shown at `c`: the agent, then monsters, boulders, objects and
/// known traps on visible cells; remembered cells show terrain only.
pub fn glyph_at(w: &World, c: Coord) -> Glyph {
    if !w.terrain.in_bounds(c) {
        return BLANK;
    }
    if w.visible[c] {
        if w.agent.pos == c {
            return Glyph {
                ch: b'@',
                color: color::WHITE,
                id: AGENT_ID,
            };
        }
        if let Some(i) = w.monster_at(c) {
            let m = &w.monsters[i];
            return Glyph {
                ch: ascii(m.info().class),
                color: m.info().color,
                id: MONSTER_BASE + m.kind as u32,
            };
        }
        if w.boulder_at(c) {
            return Glyph {
                ch: b'`',
                color: color::GRAY,
                id: boulder_id(),
            };
        }
        if let Some(f) = w.items_at(c).next() {
            let info = f.item.info();
            return Glyph {
                ch: ascii(info.class),
                color: info.color,
                id: OBJECT_BASE + f.item.kind as u32,
            };
        }
        if let Some(t) = w.trap_at(c).filter(|t| t.seen) {
            return trap_glyph(t.kind);
        }
    }
    if w.visible[c] || w.remembered[c] {
        let t = w.terrain[c].apparent();
        let (ch, col) = t.glyph();
        if ch == ' ' {
            return BLANK;
        }
        return Glyph {
            ch: ascii(ch),
            color: col,
            id: terrain_id(t),
        };
    }
    BLANK
}

/// Text description of a cell; empty for cells never seen.
pub fn describe_cell(w: &World, x: i32, y: i32) -> Result<String, ObsError> {
    let c = Coord::new(x, y);
    if !w.terrain.in_bounds(c) {
        return Err(ObsError::OutOfBounds { x, y });
    }
    Ok(describe(w, c))
}

fn describe(w: &World, c: Coord) -> String {
    if w.visible[c] {
        if w.agent.pos == c {
            return "agent".into();
        }
        if let Some(i) = w.monster_at(c) {
            return w.monsters[i].name().into();
        }
        if w.boulder_at(c) {
            return "a boulder".into();
        }
        if let Some(f) = w.items_at(c).next() {
            return f.item.describe();
        }
        if let Some(t) = w.trap_at(c).filter(|t| t.seen) {
            return t.kind.description().into();
        }
    }
    if w.visible[c] || w.remembered[c] {
        return w.terrain[c].apparent().description().into();
    }
    String::new()
}

fn window(w: &World, center: Coord, n: usize, f: impl Fn(Glyph) -> i64) -> IntGrid {
    let half = (n / 2) as i32;
    let mut data = Vec::with_capacity(n * n);
    for dy in -half..=half {
        for dx in -half..=half {
            let c = center.offset(dx, dy);
            let g = if w.terrain.in_bounds(c) { glyph_at(w, c) } else { BLANK };
            data.push(f(g));
        }
    }
    IntGrid {
        width: n,
        height: n,
        data,
    }
}

fn full(w: &World, f: impl Fn(Glyph) -> i64) -> IntGrid {
    let (width, height) = (w.terrain.width(), w.terrain.height());
    let data = w.terrain.coords().map(|c| f(glyph_at(w, c))).collect();
    IntGrid { width, height, data }
}

/// The 25-slot agent statistics vector.
pub fn stats(w: &World) -> Vec<i64> {
    let mut v = vec![0; STATS_LEN];
    v[0] = w.agent.pos.x as i64;
    v[1] = w.agent.pos.y as i64;
    v[2] = w.agent.hp;
    v[3] = w.agent.hp_max;
    v[4] = w.clock as i64;
    v[5] = w.agent.levitating() as i64;
    v[6] = w.agent.inventory.len() as i64;
    v
}

fn inventory_strings(w: &World) -> Vec<String> {
    let mut out: Vec<String> = w
        .agent
        .inventory
        .iter()
        .map(|(l, item)| {
            let mut s = item.describe();
            if w.agent.wielded == Some(*l) {
                s.push_str(" (weapon in hand)");
            }
            if w.agent.worn.contains(l) {
                s.push_str(" (being worn)");
            }
            if let Some((h, _)) = w.agent.rings.iter().find(|(_, r)| r == l) {
                s.push_str(match h {
                    crate::world::Hand::Right => " (on right hand)",
                    crate::world::Hand::Left => " (on left hand)",
                });
            }
            s
        })
        .take(INV_SLOTS)
        .collect();
    out.resize(INV_SLOTS, String::new());
    out
}

/// Builds the requested keys. Crops are `crop` x `crop` windows centred on
/// the agent, padded with blanks beyond the map edge.
pub fn observe(w: &World, keys: &[&str], crop: usize) -> Result<Observation, ObsError> {
    if crop == 0 || crop.is_multiple_of(2) {
        return Err(ObsError::BadCrop(crop));
    }
    let mut obs = Observation::default();
    for &key in keys {
        let canonical = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ObsError::UnknownKey(key.to_string()))?;
        let value = match key {
            "chars" => ObsValue::Grid(full(w, |g| g.ch as i64)),
            "colors" => ObsValue::Grid(full(w, |g| g.color as i64)),
            "ids" => ObsValue::Grid(full(w, |g| g.id as i64)),
            "chars_crop" => ObsValue::Grid(window(w, w.agent.pos, crop, |g| g.ch as i64)),
            "colors_crop" => ObsValue::Grid(window(w, w.agent.pos, crop, |g| g.color as i64)),
            "ids_crop" => ObsValue::Grid(window(w, w.agent.pos, crop, |g| g.id as i64)),
            "stats" => ObsValue::Vector(stats(w)),
            "message" => {
                let mut b: Vec<u8> = w.message.bytes().take(MESSAGE_LEN).collect();
                b.resize(MESSAGE_LEN, 0);
                ObsValue::Bytes(b)
            }
            "screen_descriptions" => ObsValue::TextGrid(
                (0..w.terrain.height() as i32)
                    .map(|y| {
                        (0..w.terrain.width() as i32)
                            .map(|x| describe(w, Coord::new(x, y)))
                            .collect()
                    })
                    .collect(),
            ),
            "inv_letters" => {
                let mut v: Vec<i64> = w.agent.inventory.iter().map(|(l, _)| *l as i64).take(INV_SLOTS).collect();
                v.resize(INV_SLOTS, 0);
                ObsValue::Vector(v)
            }
            "inv_strs" => ObsValue::TextList(inventory_strings(w)),
            _ => unreachable!("key list and match arms agree"),
        };
        obs.entries.insert(canonical, value);
    }
    Ok(obs)
}

fn ansi_color(c: u8) -> String {
    if c >= 8 {
        format!("\x1b[1;{}m", 30 + (c - 8))
    } else {
        format!("\x1b[{}m", 30 + c)
    }
}

fn status_line(w: &World) -> String {
    let mut s = format!(
        "HP:{}({}) T:{} Pos:({},{})",
        w.agent.hp, w.agent.hp_max, w.clock, w.agent.pos.x, w.agent.pos.y
    );
    if w.agent.levitating() {
        s.push_str(" Lev");
    }
    s
}

/// Message line, the 21 map rows and a status line, without colour codes.
pub fn render_text(w: &World) -> String {
    let mut out = String::new();
    out.push_str(&w.message);
    out.push('\n');
    for y in 0..MAP_HEIGHT as i32 {
        let row: String = (0..MAP_WIDTH as i32)
            .map(|x| glyph_at(w, Coord::new(x, y)).ch as char)
            .collect();
        out.push_str(row.trim_end());
        out.push('\n');
    }
    out.push_str(&status_line(w));
    out.push('\n');
    out
}

/// Like [`render_text`] with ANSI colour escapes taken from the colour grid.
pub fn render_ansi(w: &World) -> String {
    let mut out = String::new();
    out.push_str(&w.message);
    out.push('\n');
    for y in 0..MAP_HEIGHT as i32 {
        let mut current = u8::MAX;
        for x in 0..MAP_WIDTH as i32 {
            let g = glyph_at(w, Coord::new(x, y));
            if g.color != current {
                out.push_str(&ansi_color(g.color));
                current = g.color;
            }
            out.push(g.ch as char);
        }
        out.push_str("\x1b[0m\n");
    }
    out.push_str(&status_line(w));
    out.push('\n');
    out
}

/// Rows of the id table: id, category, name.
pub fn id_table() -> Vec<(u32, &'static str, String)> {
    let cat = Catalog::builtin();
    let mut rows = Vec::new();
    for (i, t) in Terrain::ALL.iter().enumerate() {
        rows.push((i as u32, "terrain", t.name().to_string()));
    }
    for (i, m) in cat.monsters.iter().enumerate() {
        rows.push((MONSTER_BASE + i as u32, "monster", m.name.clone()));
    }
    for (i, o) in cat.objects.iter().enumerate() {
        rows.push((OBJECT_BASE + i as u32, "object", o.full_name()));
    }
    rows.push((AGENT_ID, "agent", "agent".into()));
    for (i, t) in TrapKind::ALL.iter().enumerate() {
        rows.push((TRAP_BASE + i as u32, "trap", t.description().into()));
    }
    rows
}

/// The id table as tab-separated text, as shipped in `data/ids.tsv`.
pub fn id_table_tsv() -> String {
    let mut s = String::from("id\tcategory\tname\n");
    for (id, cat, name) in id_table() {
        let _ = writeln!(s, "{id}\t{cat}\t{name}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_first;
    use crate::dsl::parse_document;
    use crate::world::Action;
    use crate::geom::Dir;

    fn world(extra: &str, lit: bool) -> World {
        let src = format!(
            "MAZE: \"o\", ' '\nMAP\n-------\n|.....|\n|.....|\n|.....|\n-------\nENDMAP\nREGION:(0,0,6,4),{},\"ordinary\"\nBRANCH:(1,1,1,1),(0,0,0,0)\n{extra}",
            if lit { "lit" } else { "unlit" }
        );
        World::from_blueprint(&compile_first(&parse_document(&src).unwrap(), 0).unwrap(), 0).unwrap()
    }

    #[test]
    fn catalog_counts_match_id_layout() {
        let cat = Catalog::builtin();
        assert_eq!(cat.monsters.len() as u32, N_MONSTERS);
        assert_eq!(cat.objects.len() as u32, N_OBJECTS);
        assert_eq!(id_table().len() as u32, MAX_ID + 1);
    }

    #[test]
    fn shipped_id_table_is_current() {
        assert_eq!(include_str!("../data/ids.tsv"), id_table_tsv());
    }

    #[test]
    fn shapes() {
        let w = world("", true);
        let obs = observe(&w, &KEYS, DEFAULT_CROP).unwrap();
        assert_eq!(obs.get("chars").unwrap().shape(), (21, 79));
        assert_eq!(obs.get("ids").unwrap().shape(), (21, 79));
        assert_eq!(obs.get("chars_crop").unwrap().shape(), (9, 9));
        assert_eq!(obs.get("stats").unwrap().shape(), (25, 1));
        assert_eq!(obs.get("message").unwrap().shape(), (256, 1));
        assert_eq!(obs.get("inv_strs").unwrap().shape(), (55, 1));
        assert_eq!(obs.get("screen_descriptions").unwrap().shape(), (21, 79));
    }

    #[test]
    fn only_requested_keys() {
        let w = world("", true);
        let obs = observe(&w, &["stats"], 9).unwrap();
        assert_eq!(obs.entries.len(), 1);
        assert_eq!(observe(&w, &["pixels"], 9), Err(ObsError::UnknownKey("pixels".into())));
        assert_eq!(observe(&w, &["chars"], 4), Err(ObsError::BadCrop(4)));
    }

    #[test]
    fn crop_centred_and_padded() {
        let w = world("", true);
        let obs = observe(&w, &["chars_crop", "chars"], 81).unwrap();
        let crop = obs.get("chars_crop").unwrap().as_grid().unwrap();
        assert_eq!(crop.get(40, 40), b'@' as i64);
        let full = obs.get("chars").unwrap().as_grid().unwrap();
        let (ax, ay) = (w.agent.pos.x, w.agent.pos.y);
        for cy in 0..81 {
            for cx in 0..81 {
                let (x, y) = (ax + cx as i32 - 40, ay + cy as i32 - 40);
                let expect = if (0..79).contains(&x) && (0..21).contains(&y) {
                    full.get(x as usize, y as usize)
                } else {
                    b' ' as i64
                };
                assert_eq!(crop.get(cx, cy), expect);
            }
        }
    }

    #[test]
    fn descriptions() {
        let w = world("MONSTER:('a',\"killer bee\"),(3,1),asleep\nOBJECT:\"boulder\",(3,3)", true);
        let o = w.origin();
        assert_eq!(describe_cell(&w, o.x + 3, o.y + 1).unwrap(), "killer bee");
        assert_eq!(describe_cell(&w, o.x + 3, o.y + 3).unwrap(), "a boulder");
        assert_eq!(describe_cell(&w, o.x + 2, o.y + 2).unwrap(), "floor");
        assert_eq!(describe_cell(&w, o.x + 1, o.y + 1).unwrap(), "agent");
        assert_eq!(describe_cell(&w, 0, 0).unwrap(), "");
        assert!(describe_cell(&w, 79, 0).is_err());
    }

    #[test]
    fn grids_consistent() {
        let w = world("MONSTER:('a',\"killer bee\"),(3,1),asleep\nTRAP:\"fire\",(4,2)", true);
        let obs = observe(&w, &["chars", "ids", "colors"], 9).unwrap();
        let (ch, id) = (obs.get("chars").unwrap().as_grid().unwrap(), obs.get("ids").unwrap().as_grid().unwrap());
        for (a, b) in ch.data.iter().zip(&id.data) {
            assert_eq!(*a != b' ' as i64, *b != 0);
        }
    }

    #[test]
    fn dark_room_remembers_terrain_only() {
        let mut w = world("OBJECT:('%',\"apple\"),(2,2)", false);
        let apple = Coord::new(w.origin().x + 2, w.origin().y + 2);
        assert_eq!(glyph_at(&w, apple).ch, b'%');
        w.step(Action::Move(Dir::N)).unwrap();
        w.step(Action::Move(Dir::E)).unwrap();
        w.step(Action::Move(Dir::E)).unwrap();
        w.step(Action::Move(Dir::E)).unwrap();
        assert!(!w.visible[apple]);
        assert_eq!(glyph_at(&w, apple).ch, b'.');
        let seen = w.visible.as_slice().iter().filter(|v| **v).count();
        assert!(seen <= 9);
    }

    #[test]
    fn stats_and_message() {
        let mut w = world("", true);
        w.step(Action::Move(Dir::N)).unwrap();
        w.message = "hello".into();
        let obs = observe(&w, &["stats", "message"], 9).unwrap();
        let s = obs.get("stats").unwrap().as_vector().unwrap();
        assert_eq!((s[0], s[1]), (w.agent.pos.x as i64, w.agent.pos.y as i64));
        assert_eq!(s[2], 16);
        let json = serde_json::to_value(&obs).unwrap();
        assert_eq!(json["message"], "hello");
        assert_eq!(json["stats"].as_array().unwrap().len(), 25);
    }

    #[test]
    fn render_has_message_rows_status() {
        let w = world("", true);
        let text = render_text(&w);
        assert_eq!(text.lines().count(), 23);
        assert!(text.contains('@'));
        let ansi = render_ansi(&w);
        assert_eq!(ansi.lines().count(), 23);
        assert!(ansi.contains("\x1b[1;37m@"));
    }

    #[test]
    fn hash_changes_with_state() {
        let mut w = world("", true);
        let h0 = observe(&w, &KEYS, 9).unwrap().hash();
        assert_eq!(h0, observe(&w, &KEYS, 9).unwrap().hash());
        w.step(Action::Move(Dir::E)).unwrap();
        assert_ne!(h0, observe(&w, &KEYS, 9).unwrap().hash());
    }
}
