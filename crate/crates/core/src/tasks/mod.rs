//! Named task registry.
//!
//! A task bundles a level distribution with a reward configuration, an
//! action set, observation settings and an episode limit.

pub mod boxoban;
pub mod levels;
pub mod multiroom;
mod sketch;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;
use thiserror::Error;

use crate::compiler::{compile_first, LevelBlueprint, Requirements};
use crate::dsl::{parse_document, DslError};
use crate::observe::{DEFAULT_CROP, KEYS};
use crate::reward::{EventSpec, Matcher, RewardConfig, RewardError};
use crate::rng::GameRng;
use crate::world::{Action, PromptStyle};

use levels::{RiverOptions, RoomOptions, SkillItem};
use multiroom::MultiRoomOptions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("malformed level {index}: {reason}")]
    MalformedLevel { index: usize, reason: String },
    #[error("bad override: {0}")]
    BadOverride(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

type DesFn = Arc<dyn Fn(u64) -> String + Send + Sync>;

/// Where the levels of a task come from.
#[derive(Clone)]
pub enum LevelSource {
    /// One des program, sampled with the episode seed.
    Des(String),
    /// A des program written per seed.
    Procedural(DesFn),
    /// Ready-made blueprints; one is drawn per seed.
    Blueprints(Arc<Vec<LevelBlueprint>>),
}

impl fmt::Debug for LevelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSource::Des(s) => f.debug_tuple("Des").field(&s.len()).finish(),
            LevelSource::Procedural(_) => f.write_str("Procedural"),
            LevelSource::Blueprints(b) => f.debug_tuple("Blueprints").field(&b.len()).finish(),
        }
    }
}

impl LevelSource {
    fn procedural(f: impl Fn(u64) -> String + Send + Sync + 'static) -> Self {
        LevelSource::Procedural(Arc::new(f))
    }

    fn fixed(des: String) -> Self {
        LevelSource::Des(des)
    }

    /// Des text for `seed`, if the source is des-based.
    pub fn des(&self, seed: u64) -> Option<String> {
        match self {
            LevelSource::Des(s) => Some(s.clone()),
            LevelSource::Procedural(f) => Some(f(seed)),
            LevelSource::Blueprints(_) => None,
        }
    }

    /// Produces one level for `seed`. Errors are rendered as text.
    pub fn blueprint(&self, seed: u64) -> Result<LevelBlueprint, String> {
        match self {
            LevelSource::Blueprints(all) => {
                if all.is_empty() {
                    return Err("empty level set".into());
                }
                let i = GameRng::new(seed).below(all.len());
                Ok(all[i].clone())
            }
            _ => {
                let des = self.des(seed).unwrap_or_default();
                let doc = parse_document(&des).map_err(|e| e.to_string())?;
                compile_first(&doc, seed).map_err(|e| e.to_string())
            }
        }
    }
}

/// A registered task.
#[derive(Clone, Debug)]
pub struct EnvSpec {
    pub id: String,
    pub source: LevelSource,
    pub reward: RewardConfig,
    pub actions: Vec<Action>,
    pub obs_keys: Vec<String>,
    pub crop: usize,
    pub max_steps: u64,
    pub prompt_style: PromptStyle,
    /// Whole terrain starts remembered.
    pub mapped: bool,
    /// Objects the agent holds at the start, by catalog name.
    pub starting_inventory: Vec<String>,
    /// Checked on every sampled level; failing levels are resampled.
    pub requirements: Requirements,
}

impl EnvSpec {
    /// A free-form level: every action, interactive prompts, the default
    /// staircase reward and no level requirements.
    pub fn from_des(des: &str) -> Result<EnvSpec, TaskError> {
        parse_document(des)?;
        Ok(EnvSpec {
            id: "custom".into(),
            source: LevelSource::fixed(des.to_string()),
            reward: RewardConfig::Default,
            actions: Action::all(),
            obs_keys: SKILL_KEYS.iter().map(|s| s.to_string()).collect(),
            crop: DEFAULT_CROP,
            max_steps: 1000,
            prompt_style: PromptStyle::Interactive,
            mapped: false,
            starting_inventory: Vec::new(),
            requirements: Requirements::default(),
        })
    }
}

/// Per-instance changes to a registered task.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub des: Option<String>,
    pub reward: Option<RewardConfig>,
    pub max_steps: Option<u64>,
    pub obs_keys: Option<Vec<String>>,
    pub crop: Option<usize>,
    pub prompt_style: Option<PromptStyle>,
    pub actions: Option<Vec<Action>>,
    pub mapped: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut EnvSpec) -> Result<(), TaskError> {
        if let Some(des) = &self.des {
            parse_document(des)?;
            spec.source = LevelSource::fixed(des.clone());
            spec.requirements = Requirements::default();
        }
        if let Some(r) = &self.reward {
            r.validate()?;
            spec.reward = r.clone();
        }
        if let Some(n) = self.max_steps {
            if n == 0 {
                return Err(TaskError::BadOverride("max_steps must be positive".into()));
            }
            spec.max_steps = n;
        }
        if let Some(keys) = &self.obs_keys {
            if let Some(k) = keys.iter().find(|k| !KEYS.contains(&k.as_str())) {
                return Err(TaskError::BadOverride(format!("unknown observation key `{k}`")));
            }
            spec.obs_keys = keys.clone();
        }
        if let Some(c) = self.crop {
            if c == 0 || c % 2 == 0 {
                return Err(TaskError::BadOverride("crop must be odd".into()));
            }
            spec.crop = c;
        }
        if let Some(s) = self.prompt_style {
            spec.prompt_style = s;
        }
        if let Some(a) = &self.actions {
            if a.is_empty() {
                return Err(TaskError::BadOverride("empty action set".into()));
            }
            spec.actions = a.clone();
        }
        if let Some(m) = self.mapped {
            spec.mapped = m;
        }
        Ok(())
    }
}

pub const NAV_KEYS: [&str; 7] = ["ids", "chars", "colors", "chars_crop", "ids_crop", "stats", "message"];
pub const SKILL_KEYS: [&str; 9] = [
    "ids",
    "chars",
    "colors",
    "chars_crop",
    "ids_crop",
    "stats",
    "message",
    "inv_letters",
    "inv_strs",
];

/// Every registered task id.
pub const TASK_IDS: [&str; 78] = [
    "Room-5x5",
    "Room-15x15",
    "Room-Random-5x5",
    "Room-Random-15x15",
    "Room-Dark-5x5",
    "Room-Dark-15x15",
    "Room-Monster-5x5",
    "Room-Monster-15x15",
    "Room-Trap-5x5",
    "Room-Trap-15x15",
    "Room-Ultimate-5x5",
    "Room-Ultimate-15x15",
    "Corridor-R2",
    "Corridor-R3",
    "Corridor-R5",
    "KeyRoom-Fixed-S5",
    "KeyRoom-S5",
    "KeyRoom-Dark-S5",
    "KeyRoom-S15",
    "KeyRoom-Dark-S15",
    "MazeWalk-9x9",
    "MazeWalk-Mapped-9x9",
    "MazeWalk-15x15",
    "MazeWalk-Mapped-15x15",
    "MazeWalk-45x19",
    "MazeWalk-Mapped-45x19",
    "River-Narrow",
    "River",
    "River-Monster",
    "River-Lava",
    "River-MonsterLava",
    "HideNSeek",
    "HideNSeek-Mapped",
    "HideNSeek-Lava",
    "HideNSeek-Big",
    "CorridorBattle",
    "CorridorBattle-Dark",
    "Memento-Short-F2",
    "Memento-F2",
    "Memento-F4",
    "MazeExplore-Easy",
    "MazeExplore-Hard",
    "MazeExplore-Easy-Mapped",
    "MazeExplore-Hard-Mapped",
    "Eat",
    "Eat-Fixed",
    "Eat-Distract",
    "Pray",
    "Pray-Fixed",
    "Pray-Distract",
    "Wear",
    "Wear-Fixed",
    "Wear-Distract",
    "LockedDoor",
    "LockedDoor-Random",
    "LavaCross-Levitate-Ring-Inv",
    "LavaCross-Levitate-Potion-Inv",
    "LavaCross-Levitate-Ring-Pickup",
    "LavaCross-Levitate-Potion-PickUp",
    "LavaCross-Levitate",
    "LavaCross",
    "WoD-Easy",
    "WoD-Medium",
    "WoD-Hard",
    "WoD-Pro",
    "MultiRoom-N2",
    "MultiRoom-N4",
    "MultiRoom-N2-Monster",
    "MultiRoom-N4-Monster",
    "MultiRoom-N2-Locked",
    "MultiRoom-N4-Locked",
    "MultiRoom-N2-Lava",
    "MultiRoom-N4-Lava",
    "MultiRoom-N2-Extreme",
    "MultiRoom-N4-Extreme",
    "Boxoban-Unfiltered",
    "Boxoban-Medium",
    "Boxoban-Hard",
];

pub fn list_tasks() -> Vec<&'static str> {
    TASK_IDS.to_vec()
}

fn is_size(part: &str) -> bool {
    let dims = part.split_once('x').is_some_and(|(a, b)| {
        !a.is_empty() && !b.is_empty() && a.chars().chain(b.chars()).all(|c| c.is_ascii_digit())
    });
    let s = part.strip_prefix('S').is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()));
    dims || s
}

/// Resolves an id to its registered spelling. A `-v0` suffix is ignored and
/// the size token may come before or after the variant (`Room-5x5-Random`).
pub fn canonical_id(id: &str) -> Option<&'static str> {
    let id = id.strip_suffix("-v0").unwrap_or(id);
    if let Some(found) = TASK_IDS.iter().find(|t| **t == id) {
        return Some(found);
    }
    let parts: Vec<&str> = id.split('-').collect();
    if parts.len() >= 3 && is_size(parts[1]) {
        let mut moved: Vec<&str> = vec![parts[0]];
        moved.extend(&parts[2..]);
        moved.push(parts[1]);
        let alt = moved.join("-");
        return TASK_IDS.iter().find(|t| **t == alt).copied();
    }
    None
}

/// Builds a registered task and applies `overrides`.
pub fn make_task(id: &str, overrides: &Overrides) -> Result<EnvSpec, TaskError> {
    let canonical = canonical_id(id).ok_or_else(|| TaskError::UnknownTask(id.to_string()))?;
    let mut spec = build(canonical).ok_or_else(|| TaskError::UnknownTask(id.to_string()))?;
    overrides.apply(&mut spec)?;
    Ok(spec)
}

/// Des generator for `n_rooms` chained rooms of at most `room_size` cells a
/// side, walls included.
pub fn gen_multiroom(n_rooms: usize, room_size: i32, options: MultiRoomOptions) -> impl Fn(u64) -> String + Send + Sync {
    move |seed| multiroom::multiroom(n_rooms, room_size, options, seed)
}

fn nav(id: &str, source: LevelSource, max_steps: u64) -> EnvSpec {
    EnvSpec {
        id: id.to_string(),
        source,
        reward: RewardConfig::Default,
        actions: Action::navigation(),
        obs_keys: NAV_KEYS.iter().map(|s| s.to_string()).collect(),
        crop: DEFAULT_CROP,
        max_steps,
        prompt_style: PromptStyle::Auto,
        mapped: false,
        starting_inventory: Vec::new(),
        requirements: Requirements {
            stair_down: true,
            ..Requirements::default()
        },
    }
}

fn skill(id: &str, source: LevelSource, reward: RewardConfig, max_steps: u64) -> EnvSpec {
    EnvSpec {
        id: id.to_string(),
        source,
        reward,
        actions: Action::skill(),
        obs_keys: SKILL_KEYS.iter().map(|s| s.to_string()).collect(),
        crop: DEFAULT_CROP,
        max_steps,
        prompt_style: PromptStyle::Interactive,
        mapped: false,
        starting_inventory: Vec::new(),
        requirements: Requirements::default(),
    }
}

fn flat(events: Vec<EventSpec>) -> RewardConfig {
    RewardConfig::Flat { events }
}

fn boxoban_levels(name: &str) -> Option<Arc<Vec<LevelBlueprint>>> {
    static CACHE: OnceLock<Vec<(String, Arc<Vec<LevelBlueprint>>)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        boxoban::CORPORA
            .iter()
            .map(|(n, ..)| {
                let text = boxoban::corpus_text(n).unwrap_or_default();
                let levels = boxoban::load_boxoban(text).expect("shipped corpus parses");
                (n.to_string(), Arc::new(levels))
            })
            .collect()
    });
    all.iter().find(|(n, _)| n == name).map(|(_, l)| l.clone())
}

fn build(id: &str) -> Option<EnvSpec> {
    let parts: Vec<&str> = id.split('-').collect();
    let spec = match parts.as_slice() {
        ["Room", rest @ ..] => {
            let size = rest.last()?;
            let n: i32 = if *size == "5x5" { 5 } else { 15 };
            let variant = if rest.len() == 2 { rest[0] } else { "" };
            let many = n > 5;
            let mut o = RoomOptions {
                random: !variant.is_empty(),
                ..RoomOptions::default()
            };
            match variant {
                "Dark" => o.dark = true,
                "Monster" => o.monsters = if many { 3 } else { 1 },
                "Trap" => o.traps = if many { 5 } else { 1 },
                "Ultimate" => {
                    o.dark = true;
                    o.monsters = if many { 3 } else { 1 };
                    o.traps = if many { 5 } else { 1 };
                }
                _ => {}
            }
            nav(id, LevelSource::fixed(levels::room(n, o)), if many { 300 } else { 100 })
        }
        ["Corridor", r] => {
            let rooms: usize = r.strip_prefix('R')?.parse().ok()?;
            nav(id, LevelSource::fixed(levels::corridor(rooms)), 1000)
        }
        ["KeyRoom", rest @ ..] => {
            let size: i32 = rest.last()?.strip_prefix('S')?.parse().ok()?;
            let fixed = rest.contains(&"Fixed");
            let dark = rest.contains(&"Dark");
            let mut spec = nav(
                id,
                LevelSource::procedural(move |s| levels::key_room(size, fixed, dark, s)),
                if size > 5 { 500 } else { 200 },
            );
            let mut actions = Action::moves();
            actions.extend([Action::PickUp, Action::Apply]);
            spec.actions = actions;
            spec
        }
        ["MazeWalk", rest @ ..] => {
            let (w, h) = rest.last()?.split_once('x')?;
            let (w, h): (usize, usize) = (w.parse().ok()?, h.parse().ok()?);
            let mut spec = nav(id, LevelSource::fixed(levels::maze_walk(w, h)), (w * h * 4) as u64);
            spec.mapped = rest.contains(&"Mapped");
            spec
        }
        ["River", rest @ ..] => {
            let v = rest.first().copied().unwrap_or("");
            let o = RiverOptions {
                narrow: v == "Narrow",
                monsters: v.contains("Monster"),
                lava: v.contains("Lava"),
            };
            let mut spec = nav(id, LevelSource::procedural(move |s| levels::river(o, s)), 350);
            spec.requirements.solvable = true;
            spec
        }
        ["HideNSeek", rest @ ..] => {
            let v = rest.first().copied().unwrap_or("");
            let (w, h) = if v == "Big" { (25, 15) } else { (11, 9) };
            let des = levels::hide_n_seek(w, h, v == "Lava");
            let mut spec = nav(id, LevelSource::fixed(des), if v == "Big" { 400 } else { 200 });
            spec.mapped = v == "Mapped";
            spec
        }
        ["CorridorBattle", rest @ ..] => {
            nav(id, LevelSource::fixed(levels::corridor_battle(!rest.is_empty())), 500)
        }
        ["Memento", rest @ ..] => {
            let short = rest.contains(&"Short");
            let forks = if rest.contains(&"F4") { 4 } else { 2 };
            let mut spec = nav(
                id,
                LevelSource::procedural(move |s| levels::memento(short, forks, s)),
                if short { 200 } else { 500 },
            );
            spec.reward = flat(vec![
                EventSpec::new(Matcher::Kill("grid bug".into())).sufficient(true),
                EventSpec::new(Matcher::Trap("hole".into())).reward(-1.0).sufficient(true),
            ]);
            spec.requirements = Requirements::default();
            spec
        }
        ["MazeExplore", level, rest @ ..] => {
            let hard = *level == "Hard";
            let mut spec = nav(
                id,
                LevelSource::procedural(move |s| levels::maze_explore(hard, s)),
                if hard { 1000 } else { 500 },
            );
            spec.mapped = rest.contains(&"Mapped");
            spec.reward = flat(vec![
                EventSpec::new(Matcher::Eat("apple".into()))
                    .reward(0.5)
                    .repeatable(true)
                    .required(false),
                EventSpec::new(Matcher::Stair("down".into())).sufficient(true),
            ]);
            spec
        }
        [kind @ ("Eat" | "Pray" | "Wear"), rest @ ..] => {
            let fixed = rest.contains(&"Fixed");
            let distract = rest.contains(&"Distract");
            let (item, reward) = match *kind {
                "Eat" => (SkillItem::Apple, flat(vec![EventSpec::new(Matcher::Eat("apple".into()))])),
                "Wear" => (
                    SkillItem::Armor,
                    flat(vec![EventSpec::new(Matcher::Wear("leather armor".into()))]),
                ),
                _ => (
                    SkillItem::Altar,
                    RewardConfig::Sequential {
                        events: vec![
                            EventSpec::new(Matcher::Location("altar".into())).reward(0.0),
                            EventSpec::new(Matcher::Pray),
                        ],
                    },
                ),
            };
            skill(id, LevelSource::fixed(levels::skill_room(item, fixed, distract)), reward, 200)
        }
        ["LockedDoor", rest @ ..] => {
            let random = !rest.is_empty();
            let mut spec = skill(
                id,
                LevelSource::procedural(move |s| levels::locked_door(random, s)),
                RewardConfig::Default,
                200,
            );
            spec.requirements.stair_down = true;
            spec
        }
        ["LavaCross", rest @ ..] => {
            let (items, inventory): (Vec<&'static str>, Option<&str>) = match rest {
                ["Levitate", "Ring", "Inv"] => (vec![], Some("ring of levitation")),
                ["Levitate", "Potion", "Inv"] => (vec![], Some("potion of levitation")),
                ["Levitate", "Ring", "Pickup"] => (vec![levels::LEVITATION_ITEMS[1]], None),
                ["Levitate", "Potion", "PickUp"] => (vec![levels::LEVITATION_ITEMS[0]], None),
                ["Levitate"] => (levels::LEVITATION_ITEMS.to_vec(), None),
                [] => (
                    levels::LEVITATION_ITEMS
                        .iter()
                        .chain(levels::FREEZING_ITEMS.iter())
                        .copied()
                        .collect(),
                    None,
                ),
                _ => return None,
            };
            let mut spec = skill(
                id,
                LevelSource::procedural(move |s| levels::lava_cross(&items, s)),
                RewardConfig::Default,
                300,
            );
            spec.starting_inventory = inventory.map(String::from).into_iter().collect();
            spec
        }
        ["WoD", level] => {
            let mut spec = match *level {
                "Easy" => {
                    let mut s = skill(
                        id,
                        LevelSource::procedural(levels::wod_easy),
                        flat(vec![EventSpec::new(Matcher::Kill("minotaur".into()))]),
                        200,
                    );
                    s.starting_inventory = vec!["wand of death".into()];
                    s
                }
                "Medium" => skill(id, LevelSource::fixed(levels::wod_corridor(true)), RewardConfig::Default, 300),
                "Hard" => skill(id, LevelSource::fixed(levels::wod_corridor(false)), RewardConfig::Default, 300),
                "Pro" => skill(id, LevelSource::fixed(levels::wod_pro()), RewardConfig::Default, 500),
                _ => return None,
            };
            if *level != "Easy" {
                spec.requirements.stair_down = true;
            }
            spec
        }
        ["MultiRoom", n, rest @ ..] => {
            let rooms: usize = n.strip_prefix('N')?.parse().ok()?;
            let o = match rest {
                [] => MultiRoomOptions::default(),
                ["Monster"] => MultiRoomOptions {
                    monsters: true,
                    ..Default::default()
                },
                ["Locked"] => MultiRoomOptions {
                    locked: true,
                    ..Default::default()
                },
                ["Lava"] => MultiRoomOptions {
                    lava: true,
                    ..Default::default()
                },
                ["Extreme"] => MultiRoomOptions::extreme(),
                _ => return None,
            };
            nav(
                id,
                LevelSource::procedural(gen_multiroom(rooms, 5, o)),
                100 * rooms as u64,
            )
        }
        ["Boxoban", set] => {
            let mut spec = nav(id, LevelSource::Blueprints(boxoban_levels(set)?), 400);
            spec.actions = Action::moves();
            spec.reward = flat(vec![EventSpec::new(Matcher::BouldersOnTargets)]);
            spec.requirements = Requirements::default();
            spec
        }
        _ => return None,
    };
    Some(spec)
}
