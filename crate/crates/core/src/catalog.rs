//! Bestiary and object catalog loaded from the shipped TSV tables.

use std::sync::OnceLock;

use thiserror::Error;

use crate::rng::GameRng;
use crate::terrain::color;

const MONSTERS_TSV: &str = include_str!("../data/monsters.tsv");
const OBJECTS_TSV: &str = include_str!("../data/objects.tsv");
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("{table}: missing or wrong header (expected `{expected}`)")]
    BadHeader {
        table: &'static str,
        expected: String,
    },
    #[error("{table} line {line}: {reason}")]
    BadRow {
        table: &'static str,
        line: usize,
        reason: String,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dice {
    pub n: u32,
    pub m: u32,
}

impl Dice {
    pub fn parse(s: &str) -> Option<Dice> {
        let (n, m) = s.split_once('d')?;
        Some(Dice {
            n: n.parse().ok()?,
            m: m.parse().ok()?,
        })
    }

    pub fn roll(&self, rng: &mut GameRng) -> i64 {
        if self.n == 0 || self.m == 0 {
            0
        } else {
            rng.roll(self.n, self.m)
        }
    }

    pub fn max(&self) -> i64 {
        self.n as i64 * self.m as i64
    }
}

impl std::fmt::Display for Dice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}d{}", self.n, self.m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonsterKind {
    pub name: String,
    pub class: char,
    pub hit_dice: Dice,
    pub damage: Dice,
    pub speed: u32,
    pub color: u8,
    pub hostile: bool,
    pub instakill: bool,
    pub ranged: bool,
    pub nogen: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Comestible,
    Weapon,
    Armor,
    Boots,
    Wand,
    Potion,
    Ring,
    Tool,
    Key,
    Amulet,
    Gold,
    Rock,
}

impl Category {
    fn parse(s: &str) -> Option<Category> {
        Some(match s {
            "comestible" => Category::Comestible,
            "weapon" => Category::Weapon,
            "armor" => Category::Armor,
            "boots" => Category::Boots,
            "wand" => Category::Wand,
            "potion" => Category::Potion,
            "ring" => Category::Ring,
            "tool" => Category::Tool,
            "key" => Category::Key,
            "amulet" => Category::Amulet,
            "gold" => Category::Gold,
            "rock" => Category::Rock,
            _ => return None,
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    None,
    Damage(Dice),
    Levitation,
    Death,
    Cold,
    Unlock,
    Heal,
}

impl Effect {
    fn parse(s: &str) -> Option<Effect> {
        Some(match s {
            "-" => Effect::None,
            "levitation" => Effect::Levitation,
            "death" => Effect::Death,
            "cold" => Effect::Cold,
            "unlock" => Effect::Unlock,
            "heal" => Effect::Heal,
            _ => Effect::Damage(Dice::parse(s.strip_prefix("dmg:")?)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectKind {
    pub name: String,
    pub class: char,
    pub category: Category,
    pub effect: Effect,
    pub color: u8,
    pub nogen: bool,
}

impl ObjectKind {
    /// Name with the class-specific prefix, e.g. "wand of death".
    pub fn full_name(&self) -> String {
        match self.category {
            Category::Wand => format!("wand of {}", self.name),
            Category::Potion => format!("potion of {}", self.name),
            Category::Ring => format!("ring of {}", self.name),
            Category::Boots => format!("pair of {}", self.name),
            _ => self.name.clone(),
        }
    }

    /// Description with an indefinite article or quantity.
    pub fn describe(&self, quantity: u32, montype: Option<&str>) -> String {
        if let Some(m) = montype {
            return format!("{} {} of {} {}", article(&self.name), self.name, article(m), m);
        }
        let full = self.full_name();
        if quantity > 1 {
            format!("{} {}s", quantity, full)
        } else {
            article(&full).to_string() + " " + &full
        }
    }
}

pub fn article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

#[derive(Debug)]
pub struct Catalog {
    pub monsters: Vec<MonsterKind>,
    pub objects: Vec<ObjectKind>,
}

/// Index into [`Catalog::monsters`].
pub type MonsterId = usize;
/// Index into [`Catalog::objects`].
pub type ObjectId = usize;

impl Catalog {
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            Catalog::from_tables(MONSTERS_TSV, OBJECTS_TSV).expect("shipped catalog is valid")
        })
    }

    pub fn from_tables(monsters: &str, objects: &str) -> Result<Catalog, CatalogError> {
        let monsters = rows("monsters", "hackbox-monsters", monsters)?
            .into_iter()
            .map(|(line, cols)| parse_monster(line, &cols))
            .collect::<Result<Vec<_>, _>>()?;
        let objects = rows("objects", "hackbox-objects", objects)?
            .into_iter()
            .map(|(line, cols)| parse_object(line, &cols))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Catalog { monsters, objects })
    }

    pub fn monster_by_name(&self, name: &str) -> Option<MonsterId> {
        self.monsters
            .iter()
            .position(|m| m.name == name)
            .or_else(|| {
                self.monsters
                    .iter()
                    .position(|m| m.name.eq_ignore_ascii_case(name))
            })
    }

    pub fn object_by_name(&self, name: &str, class: Option<char>) -> Option<ObjectId> {
        let matches = |o: &ObjectKind, exact: bool| {
            let name_ok = if exact {
                o.name == name || o.full_name() == name
            } else {
                o.name.eq_ignore_ascii_case(name) || o.full_name().eq_ignore_ascii_case(name)
            };
            name_ok && class.is_none_or(|c| c == o.class)
        };
        self.objects
            .iter()
            .position(|o| matches(o, true))
            .or_else(|| self.objects.iter().position(|o| matches(o, false)))
    }

    /// Uniform choice among generatable monsters, optionally of one class.
    /// A class with no generatable members falls back to all its members.
    pub fn random_monster(&self, class: Option<char>, rng: &mut GameRng) -> Option<MonsterId> {
        let of_class: Vec<MonsterId> = (0..self.monsters.len())
            .filter(|&i| class.is_none_or(|c| self.monsters[i].class == c))
            .collect();
        let gen: Vec<MonsterId> = of_class
            .iter()
            .copied()
            .filter(|&i| !self.monsters[i].nogen)
            .collect();
        let pool = if gen.is_empty() { &of_class } else { &gen };
        rng.choose(pool).copied()
    }

    pub fn random_object(&self, class: Option<char>, rng: &mut GameRng) -> Option<ObjectId> {
        let of_class: Vec<ObjectId> = (0..self.objects.len())
            .filter(|&i| class.is_none_or(|c| self.objects[i].class == c))
            .collect();
        let gen: Vec<ObjectId> = of_class
            .iter()
            .copied()
            .filter(|&i| !self.objects[i].nogen)
            .collect();
        let pool = if gen.is_empty() { &of_class } else { &gen };
        rng.choose(pool).copied()
    }
}

fn rows<'a>(
    table: &'static str,
    magic: &str,
    text: &'a str,
) -> Result<Vec<(usize, Vec<&'a str>)>, CatalogError> {
    let expected = format!("{magic}\t{FORMAT_VERSION}");
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == expected => {}
        _ => return Err(CatalogError::BadHeader { table, expected }),
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').collect()))
        .collect())
}

fn bad(table: &'static str, line: usize, reason: impl Into<String>) -> CatalogError {
    CatalogError::BadRow {
        table,
        line,
        reason: reason.into(),
    }
}

fn single_char(table: &'static str, line: usize, s: &str) -> Result<char, CatalogError> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(bad(table, line, format!("class must be one char, got {s:?}"))),
    }
}

fn parse_monster(line: usize, cols: &[&str]) -> Result<MonsterKind, CatalogError> {
    const T: &str = "monsters";
    if cols.len() != 7 {
        return Err(bad(T, line, format!("expected 7 columns, got {}", cols.len())));
    }
    let dice = |s: &str| Dice::parse(s).ok_or_else(|| bad(T, line, format!("bad dice {s:?}")));
    let flags: Vec<&str> = cols[6].split(',').map(str::trim).collect();
    for f in &flags {
        if !matches!(*f, "hostile" | "peaceful" | "instakill" | "ranged" | "nogen") {
            return Err(bad(T, line, format!("unknown flag {f:?}")));
        }
    }
    Ok(MonsterKind {
        name: cols[0].to_string(),
        class: single_char(T, line, cols[1])?,
        hit_dice: dice(cols[2])?,
        damage: dice(cols[3])?,
        speed: cols[4]
            .parse()
            .map_err(|_| bad(T, line, format!("bad speed {:?}", cols[4])))?,
        color: color::from_name(cols[5])
            .ok_or_else(|| bad(T, line, format!("unknown color {:?}", cols[5])))?,
        hostile: !flags.contains(&"peaceful"),
        instakill: flags.contains(&"instakill"),
        ranged: flags.contains(&"ranged"),
        nogen: flags.contains(&"nogen"),
    })
}

fn parse_object(line: usize, cols: &[&str]) -> Result<ObjectKind, CatalogError> {
    const T: &str = "objects";
    if cols.len() != 6 {
        return Err(bad(T, line, format!("expected 6 columns, got {}", cols.len())));
    }
    Ok(ObjectKind {
        name: cols[0].to_string(),
        class: single_char(T, line, cols[1])?,
        category: Category::parse(cols[2])
            .ok_or_else(|| bad(T, line, format!("unknown category {:?}", cols[2])))?,
        effect: Effect::parse(cols[3])
            .ok_or_else(|| bad(T, line, format!("unknown effect {:?}", cols[3])))?,
        color: color::from_name(cols[4])
            .ok_or_else(|| bad(T, line, format!("unknown color {:?}", cols[4])))?,
        nogen: match cols[5] {
            "-" => false,
            "nogen" => true,
            other => return Err(bad(T, line, format!("unknown flag {other:?}"))),
        },
    })
}
