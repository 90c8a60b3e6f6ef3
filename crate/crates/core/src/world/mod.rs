//! Turn-based simulation of one compiled level.
//!
//! A step runs the agent phase and, when game time advanced, one monster
//! phase. Everything that happened is reported as [`Event`]s; rewards and
//! termination policy live in [`crate::reward`].

mod action;
mod fov;

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Catalog, Category, Effect, MonsterId, MonsterKind, ObjectId, ObjectKind};
use crate::compiler::{canonical_trap, LevelBlueprint, PlacementKind};
use crate::geom::{Coord, Dir, Grid};
use crate::rng::GameRng;
use crate::terrain::Terrain;

pub use action::Action;
pub use fov::{compute_fov, line_of_sight};

pub const AGENT_HP: i64 = 16;
pub const LEVITATION_TURNS: u32 = 50;
pub const OPEN_CHANCE: f64 = 0.8;
pub const KICK_CHANCE: f64 = 0.5;
pub const SEARCH_CHANCE: f64 = 1.0 / 3.0;
pub const RAY_RANGE: i32 = 20;
const LETTERS: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
const UNARMED: crate::catalog::Dice = crate::catalog::Dice { n: 1, m: 6 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("the episode is already over")]
    EpisodeAlreadyDone,
    #[error("the level has no free cell to start on")]
    NoStartCell,
    #[error("action `{0}` is not allowed in this environment")]
    IllegalAction(Action),
    #[error("no inventory item '{0}'")]
    NoSuchItem(char),
    #[error("cannot {action} item '{letter}'")]
    WrongCategory { letter: char, action: Action },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("inventory is full")]
    InventoryFull,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Item {
    pub kind: ObjectId,
    pub quantity: u32,
    pub montype: Option<String>,
}

impl Item {
    pub fn new(kind: ObjectId) -> Self {
        Item {
            kind,
            quantity: 1,
            montype: None,
        }
    }

    pub fn info(&self) -> &'static ObjectKind {
        &Catalog::builtin().objects[self.kind]
    }

    pub fn describe(&self) -> String {
        self.info().describe(self.quantity, self.montype.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloorItem {
    pub pos: Coord,
    pub item: Item,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    Teleport,
    Fire,
    Hole,
}

impl TrapKind {
    pub const ALL: [TrapKind; 3] = [TrapKind::Teleport, TrapKind::Fire, TrapKind::Hole];

    pub fn from_name(name: &str) -> Option<TrapKind> {
        match canonical_trap(name)? {
            "teleport" => Some(TrapKind::Teleport),
            "fire" => Some(TrapKind::Fire),
            _ => Some(TrapKind::Hole),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrapKind::Teleport => "teleport",
            TrapKind::Fire => "fire",
            TrapKind::Hole => "hole",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            TrapKind::Teleport => "teleportation trap",
            TrapKind::Fire => "fire trap",
            TrapKind::Hole => "hole",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trap {
    pub kind: TrapKind,
    pub pos: Coord,
    /// Holes start hidden; every trap becomes seen once triggered or found.
    pub seen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Monster {
    pub kind: MonsterId,
    pub pos: Coord,
    pub hp: i64,
    pub asleep: bool,
    pub hostile: bool,
}

impl Monster {
    pub fn info(&self) -> &'static MonsterKind {
        &Catalog::builtin().monsters[self.kind]
    }

    pub fn name(&self) -> &'static str {
        &self.info().name
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Right,
    Left,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agent {
    pub pos: Coord,
    pub hp: i64,
    pub hp_max: i64,
    /// Items in letter-assignment order.
    pub inventory: Vec<(char, Item)>,
    pub wielded: Option<char>,
    pub worn: Vec<char>,
    pub rings: Vec<(Hand, char)>,
    pub levitation_timer: u32,
}

impl Agent {
    fn new(pos: Coord) -> Self {
        Agent {
            pos,
            hp: AGENT_HP,
            hp_max: AGENT_HP,
            inventory: Vec::new(),
            wielded: None,
            worn: Vec::new(),
            rings: Vec::new(),
            levitation_timer: 0,
        }
    }

    pub fn item(&self, letter: char) -> Option<&Item> {
        self.inventory.iter().find(|(l, _)| *l == letter).map(|(_, i)| i)
    }

    pub fn alive(&self) -> bool {
        self.hp > 0
    }

    fn wearing(&self, letter: char) -> bool {
        self.worn.contains(&letter) || self.rings.iter().any(|(_, l)| *l == letter)
    }

    /// Levitating from a potion, or from a worn ring or pair of boots.
    pub fn levitating(&self) -> bool {
        self.levitation_timer > 0
            || self
                .inventory
                .iter()
                .any(|(l, i)| self.wearing(*l) && i.info().effect == Effect::Levitation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PromptKind {
    Confirmation { origin: Action },
    ItemSelect { origin: Action, candidates: Vec<char> },
    Finger { item: char },
    DirectionSelect { origin: Action, item: Option<char> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prompt {
    pub question: String,
    #[serde(flatten)]
    pub kind: PromptKind,
}

/// How multi-step commands are answered.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    /// Prompts stay open until follow-up actions resolve them.
    #[default]
    Interactive,
    /// Prompts are answered at once: yes, the first candidate item, and the
    /// facing direction (or the adjacent door the command targets).
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Ate { name: String },
    Wielded { name: String },
    Worn { name: String },
    PutOn { name: String },
    Quaffed { name: String },
    PickedUp { name: String },
    Killed { name: String },
    ReachedStair { direction: String },
    /// Entered a feature cell; `kind` is the terrain name, e.g. `sink`.
    ReachedFeature { kind: String },
    /// Entered a cell; `coord` is relative to the level's map area.
    ReachedCoord { coord: Coord },
    Prayed,
    DoorOpened,
    Died { cause: String },
    TrapTriggered { name: String },
    BouldersOnTargets,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Died { cause: String },
    FellThrough,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Died { cause } => write!(f, "died ({cause})"),
            Termination::FellThrough => f.write_str("fell through a hole"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepOutcome {
    pub events: Vec<Event>,
    pub time_advanced: bool,
}

enum Flow {
    Done(bool),
    Ask(Prompt),
}

#[derive(Clone, Debug)]
pub struct World {
    pub terrain: Grid<Terrain>,
    pub lit: Grid<bool>,
    pub remembered: Grid<bool>,
    pub visible: Grid<bool>,
    pub boulders: Vec<Coord>,
    pub monsters: Vec<Monster>,
    pub items: Vec<FloorItem>,
    pub traps: Vec<Trap>,
    pub agent: Agent,
    pub prompt: Option<Prompt>,
    pub clock: u64,
    pub message: String,
    pub done: Option<Termination>,
    pub style: PromptStyle,
    facing: Dir,
    origin: Coord,
    rng: GameRng,
}

fn door_blocks_diagonal(t: Terrain) -> bool {
    matches!(t, Terrain::OpenDoor | Terrain::ClosedDoor | Terrain::LockedDoor)
}

fn verb(origin: Action) -> &'static str {
    match origin {
        Action::Eat => "eat",
        Action::Wear => "wear",
        Action::Wield => "wield",
        Action::PutOn => "put on",
        Action::Quaff => "drink",
        Action::Zap => "zap",
        Action::Apply => "use or apply",
        Action::Read => "read",
        _ => "use",
    }
}

impl World {
    /// Instantiates a blueprint. The agent starts on the blueprint's start
    /// cell, or on a random free floor cell when it has none.
    pub fn from_blueprint(bp: &LevelBlueprint, seed: u64) -> Result<World, EngineError> {
        let catalog = Catalog::builtin();
        let mut rng = GameRng::new(seed);
        let (w, h) = (bp.terrain.width(), bp.terrain.height());
        let mut world = World {
            terrain: bp.terrain.clone(),
            lit: bp.lit.clone(),
            remembered: Grid::new(w, h, false),
            visible: Grid::new(w, h, false),
            boulders: Vec::new(),
            monsters: Vec::new(),
            items: Vec::new(),
            traps: Vec::new(),
            agent: Agent::new(Coord::new(0, 0)),
            prompt: None,
            clock: 0,
            message: String::new(),
            done: None,
            style: PromptStyle::Interactive,
            facing: Dir::E,
            origin: Coord::new(bp.map_area.x1, bp.map_area.y1),
            rng: GameRng::new(0),
        };
        for p in &bp.placements {
            match p.kind {
                PlacementKind::Monster => {
                    let Some(id) = catalog.monster_by_name(&p.name) else {
                        continue;
                    };
                    let hp = catalog.monsters[id].hit_dice.roll(&mut rng).max(1);
                    world.monsters.push(Monster {
                        kind: id,
                        pos: p.pos,
                        hp,
                        asleep: p.asleep,
                        hostile: p.hostile,
                    });
                }
                PlacementKind::Object if p.name == "boulder" => world.boulders.push(p.pos),
                PlacementKind::Object => {
                    let class = (p.class != '\0').then_some(p.class);
                    if let Some(id) = catalog.object_by_name(&p.name, class) {
                        world.items.push(FloorItem {
                            pos: p.pos,
                            item: Item {
                                kind: id,
                                quantity: p.quantity.max(1),
                                montype: p.montype.clone(),
                            },
                        });
                    }
                }
                PlacementKind::Trap => {
                    if let Some(kind) = TrapKind::from_name(&p.name) {
                        world.traps.push(Trap {
                            kind,
                            pos: p.pos,
                            seen: kind != TrapKind::Hole,
                        });
                    }
                }
                PlacementKind::Feature => {}
            }
        }
        let start = match bp.start_pos {
            Some(s) if world.terrain.in_bounds(s) => s,
            _ => {
                let free: Vec<Coord> = world
                    .terrain
                    .coords()
                    .filter(|&c| world.terrain[c].is_open_floor() && world.free_for_entity(c))
                    .collect();
                *rng.choose(&free).ok_or(EngineError::NoStartCell)?
            }
        };
        world.agent.pos = start;
        world.rng = rng;
        world.update_fov();
        Ok(world)
    }

    /// Marks the whole map as remembered, as in the mapped task variants.
    pub fn reveal_map(&mut self) {
        self.remembered.fill(true);
    }

    /// Top-left canvas cell of the level's map area.
    pub fn origin(&self) -> Coord {
        self.origin
    }

    /// Direction of the most recent move attempt.
    pub fn facing(&self) -> Dir {
        self.facing
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    pub fn monster_at(&self, c: Coord) -> Option<usize> {
        self.monsters.iter().position(|m| m.pos == c)
    }

    pub fn boulder_at(&self, c: Coord) -> bool {
        self.boulders.contains(&c)
    }

    pub fn trap_at(&self, c: Coord) -> Option<&Trap> {
        self.traps.iter().find(|t| t.pos == c)
    }

    pub fn items_at(&self, c: Coord) -> impl Iterator<Item = &FloorItem> {
        self.items.iter().filter(move |f| f.pos == c)
    }

    fn free_for_entity(&self, c: Coord) -> bool {
        self.monster_at(c).is_none() && !self.boulder_at(c) && self.agent.pos != c
    }

    /// Adds an item to the inventory by catalog name, returning its letter.
    pub fn give(&mut self, name: &str) -> Result<char, EngineError> {
        let id = Catalog::builtin()
            .object_by_name(name, None)
            .ok_or_else(|| EngineError::UnknownObject(name.to_string()))?;
        self.add_to_inventory(Item::new(id)).ok_or(EngineError::InventoryFull)
    }

    fn add_to_inventory(&mut self, item: Item) -> Option<char> {
        if item.info().category == Category::Gold {
            if let Some((_, g)) = self.agent.inventory.iter_mut().find(|(l, _)| *l == '$') {
                g.quantity += item.quantity;
            } else {
                self.agent.inventory.push(('$', item));
            }
            return Some('$');
        }
        if item.montype.is_none() {
            if let Some((l, i)) = self
                .agent
                .inventory
                .iter_mut()
                .find(|(_, i)| i.kind == item.kind && i.montype.is_none())
            {
                i.quantity += item.quantity;
                return Some(*l);
            }
        }
        let letter = LETTERS
            .chars()
            .find(|c| self.agent.item(*c).is_none())?;
        self.agent.inventory.push((letter, item));
        Some(letter)
    }

    /// Removes one unit of an inventory item.
    fn consume(&mut self, letter: char) {
        let Some(idx) = self.agent.inventory.iter().position(|(l, _)| *l == letter) else {
            return;
        };
        let item = &mut self.agent.inventory[idx].1;
        item.quantity = item.quantity.saturating_sub(1);
        if item.quantity == 0 {
            self.agent.inventory.remove(idx);
            if self.agent.wielded == Some(letter) {
                self.agent.wielded = None;
            }
            self.agent.worn.retain(|l| *l != letter);
            self.agent.rings.retain(|(_, l)| *l != letter);
        }
    }

    /// Advances the world by one agent action.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EngineError> {
        if self.done.is_some() {
            return Err(EngineError::EpisodeAlreadyDone);
        }
        self.message.clear();
        let mut ev = Vec::new();
        let flow = match self.prompt.take() {
            Some(p) => self.resolve(p, action, &mut ev),
            None => self.act(action, &mut ev),
        };
        let advanced = self.settle(flow, &mut ev);
        Ok(self.finish(advanced, ev))
    }

    /// Uses an inventory item directly, bypassing prompts. `dir` defaults
    /// to the facing direction for commands that need one.
    pub fn use_item(&mut self, action: Action, letter: char, dir: Option<Dir>) -> Result<StepOutcome, EngineError> {
        if self.done.is_some() {
            return Err(EngineError::EpisodeAlreadyDone);
        }
        self.check_item(action, letter)?;
        self.prompt = None;
        self.message.clear();
        let mut ev = Vec::new();
        let mut flow = self.use_checked(action, letter, &mut ev);
        let advanced = loop {
            match flow {
                Flow::Done(a) => break a,
                Flow::Ask(p) => {
                    let answer = match (&p.kind, dir) {
                        (PromptKind::DirectionSelect { .. }, Some(d)) => Action::Direction(d),
                        _ => self.auto_answer(&p),
                    };
                    flow = self.resolve(p, answer, &mut ev);
                }
            }
        };
        Ok(self.finish(advanced, ev))
    }

    fn settle(&mut self, mut flow: Flow, ev: &mut Vec<Event>) -> bool {
        loop {
            match flow {
                Flow::Done(a) => return a,
                Flow::Ask(p) if self.style == PromptStyle::Auto => {
                    let answer = self.auto_answer(&p);
                    flow = self.resolve(p, answer, ev);
                }
                Flow::Ask(p) => {
                    self.message = p.question.clone();
                    self.prompt = Some(p);
                    return false;
                }
            }
        }
    }

    fn finish(&mut self, advanced: bool, mut events: Vec<Event>) -> StepOutcome {
        if advanced {
            self.clock += 1;
            if self.done.is_none() {
                self.tick_levitation(&mut events);
            }
            if self.done.is_none() {
                self.monster_phase(&mut events);
            }
        }
        self.update_fov();
        StepOutcome {
            events,
            time_advanced: advanced,
        }
    }

    fn update_fov(&mut self) {
        fov::fov_into(&self.terrain, &self.lit, self.agent.pos, &mut self.visible);
        for (r, v) in self
            .remembered
            .as_mut_slice()
            .iter_mut()
            .zip(self.visible.as_slice())
        {
            *r |= *v;
        }
    }

    fn tick_levitation(&mut self, ev: &mut Vec<Event>) {
        if self.agent.levitation_timer == 0 {
            return;
        }
        self.agent.levitation_timer -= 1;
        if self.agent.levitation_timer == 0 && !self.agent.levitating() {
            self.message = "You float gently to the ground.".into();
            let t = self.terrain[self.agent.pos];
            if t.is_liquid() {
                self.die(t.name(), ev);
            }
        }
    }

    fn die(&mut self, cause: &str, ev: &mut Vec<Event>) {
        self.agent.hp = 0;
        self.done = Some(Termination::Died {
            cause: cause.to_string(),
        });
        ev.push(Event::Died {
            cause: cause.to_string(),
        });
    }

    fn act(&mut self, action: Action, ev: &mut Vec<Event>) -> Flow {
        match action {
            Action::Move(d) => Flow::Done(self.do_move(d, ev)),
            Action::Search => {
                self.search();
                Flow::Done(true)
            }
            Action::Kick | Action::Open => Flow::Ask(Prompt {
                question: "In what direction?".into(),
                kind: PromptKind::DirectionSelect {
                    origin: action,
                    item: None,
                },
            }),
            Action::Eat => {
                let here = self.pos_item(|i| i.info().category == Category::Comestible);
                match here {
                    Some(idx) => {
                        let name = self.items[idx].item.info().full_name();
                        Flow::Ask(Prompt {
                            question: format!(
                                "There is {} {name} here; eat it? [ynq] (n)",
                                crate::catalog::article(&name)
                            ),
                            kind: PromptKind::Confirmation { origin: Action::Eat },
                        })
                    }
                    None => self.ask_item(Action::Eat),
                }
            }
            Action::PickUp => Flow::Done(self.pick_up(ev)),
            Action::Pray => Flow::Ask(Prompt {
                question: "Are you sure you want to pray? [yn] (n)".into(),
                kind: PromptKind::Confirmation { origin: Action::Pray },
            }),
            Action::Apply
            | Action::Wear
            | Action::Wield
            | Action::PutOn
            | Action::Quaff
            | Action::Zap
            | Action::Read => self.ask_item(action),
            Action::Confirm(_) | Action::MenuSelect(_) | Action::Direction(_) => Flow::Done(false),
        }
    }

    fn pos_item(&self, pred: impl Fn(&Item) -> bool) -> Option<usize> {
        self.items
            .iter()
            .position(|f| f.pos == self.agent.pos && pred(&f.item))
    }

    fn fits(&self, origin: Action, letter: char, item: &Item) -> bool {
        let cat = item.info().category;
        match origin {
            Action::Eat => cat == Category::Comestible,
            Action::Wear => matches!(cat, Category::Armor | Category::Boots) && !self.agent.wearing(letter),
            Action::Wield => cat == Category::Weapon && self.agent.wielded != Some(letter),
            Action::PutOn => {
                (cat == Category::Ring && self.agent.rings.len() < 2 || cat == Category::Amulet)
                    && !self.agent.wearing(letter)
            }
            Action::Quaff => cat == Category::Potion,
            Action::Zap => cat == Category::Wand,
            Action::Apply => matches!(cat, Category::Tool | Category::Key),
            _ => false,
        }
    }

    fn candidates(&self, origin: Action) -> Vec<char> {
        self.agent
            .inventory
            .iter()
            .filter(|(l, i)| self.fits(origin, *l, i))
            .map(|(l, _)| *l)
            .collect()
    }

    fn ask_item(&mut self, origin: Action) -> Flow {
        let candidates = self.candidates(origin);
        if candidates.is_empty() {
            self.message = match origin {
                Action::Wear => "You don't have anything else to wear.".into(),
                _ => format!("You don't have anything to {}.", verb(origin)),
            };
            return Flow::Done(false);
        }
        let letters: String = candidates.iter().collect();
        Flow::Ask(Prompt {
            question: format!("What do you want to {}? [{letters} or ?*]", verb(origin)),
            kind: PromptKind::ItemSelect { origin, candidates },
        })
    }

    fn check_item(&self, origin: Action, letter: char) -> Result<(), EngineError> {
        let item = self.agent.item(letter).ok_or(EngineError::NoSuchItem(letter))?;
        if self.fits(origin, letter, item) {
            Ok(())
        } else {
            Err(EngineError::WrongCategory { letter, action: origin })
        }
    }

    fn auto_answer(&self, p: &Prompt) -> Action {
        match &p.kind {
            PromptKind::Confirmation { .. } => Action::Confirm(true),
            PromptKind::ItemSelect { candidates, .. } => Action::MenuSelect(candidates[0]),
            PromptKind::Finger { .. } => {
                let right_used = self.agent.rings.iter().any(|(h, _)| *h == Hand::Right);
                Action::MenuSelect(if right_used { 'l' } else { 'r' })
            }
            PromptKind::DirectionSelect { origin, item } => Action::Direction(self.auto_direction(*origin, *item)),
        }
    }

    fn auto_direction(&self, origin: Action, item: Option<char>) -> Dir {
        let wants: &[Terrain] = match origin {
            Action::Open => &[Terrain::ClosedDoor],
            Action::Kick => &[Terrain::LockedDoor, Terrain::ClosedDoor],
            Action::Apply
                if item.and_then(|l| self.agent.item(l)).map(|i| i.info().effect) == Some(Effect::Unlock) =>
            {
                &[Terrain::LockedDoor]
            }
            _ => &[],
        };
        let at = |d: Dir| self.terrain.get(self.agent.pos.step(d)).copied();
        if wants.is_empty() || at(self.facing).is_some_and(|t| wants.contains(&t)) {
            return self.facing;
        }
        wants
            .iter()
            .find_map(|w| Dir::ALL.into_iter().find(|&d| at(d) == Some(*w)))
            .unwrap_or(self.facing)
    }

    fn never_mind(&mut self) -> Flow {
        self.message = "Never mind.".into();
        Flow::Done(false)
    }

    fn resolve(&mut self, p: Prompt, action: Action, ev: &mut Vec<Event>) -> Flow {
        let action = match (action, &p.kind) {
            (Action::Move(d), PromptKind::DirectionSelect { .. }) => Action::Direction(d),
            _ => action,
        };
        match (p.kind, action) {
            (PromptKind::Confirmation { origin: Action::Eat }, Action::Confirm(true)) => {
                match self.pos_item(|i| i.info().category == Category::Comestible) {
                    Some(idx) => {
                        let name = self.items[idx].item.info().name.clone();
                        let item = &mut self.items[idx].item;
                        item.quantity -= 1;
                        if item.quantity == 0 {
                            self.items.remove(idx);
                        }
                        self.message = format!("This {name} is delicious!");
                        ev.push(Event::Ate { name });
                        Flow::Done(true)
                    }
                    None => self.never_mind(),
                }
            }
            (PromptKind::Confirmation { origin: Action::Eat }, Action::Confirm(false)) => self.ask_item(Action::Eat),
            (PromptKind::Confirmation { origin: Action::Pray }, Action::Confirm(true)) => {
                if self.terrain[self.agent.pos] == Terrain::Altar {
                    self.message = "You feel a hopeful feeling.".into();
                    ev.push(Event::Prayed);
                } else {
                    self.message = "You feel that your prayer goes unheard.".into();
                }
                Flow::Done(true)
            }
            (PromptKind::ItemSelect { origin, .. }, Action::MenuSelect(letter)) => {
                match self.check_item(origin, letter) {
                    Ok(()) => self.use_checked(origin, letter, ev),
                    Err(EngineError::NoSuchItem(_)) => {
                        self.message = "You don't have that object.".into();
                        Flow::Done(false)
                    }
                    Err(_) => {
                        self.message = format!("You cannot {} that!", verb(origin));
                        Flow::Done(false)
                    }
                }
            }
            (PromptKind::Finger { item }, Action::MenuSelect(c @ ('r' | 'l'))) => {
                let hand = if c == 'r' { Hand::Right } else { Hand::Left };
                if self.agent.rings.iter().any(|(h, _)| *h == hand) {
                    self.message = "You are already wearing a ring on that hand.".into();
                    return Flow::Done(false);
                }
                self.agent.rings.push((hand, item));
                self.put_on_done(item, ev)
            }
            (PromptKind::DirectionSelect { origin, item }, Action::Direction(d)) => self.directed(origin, item, d, ev),
            _ => self.never_mind(),
        }
    }

    fn put_on_done(&mut self, letter: char, ev: &mut Vec<Event>) -> Flow {
        let item = self.agent.item(letter).cloned().expect("checked item");
        self.message = format!("{letter} - {} (being worn).", item.describe());
        ev.push(Event::PutOn {
            name: item.info().name.clone(),
        });
        Flow::Done(true)
    }

    /// Applies an item that passed [`World::check_item`].
    fn use_checked(&mut self, origin: Action, letter: char, ev: &mut Vec<Event>) -> Flow {
        let item = self.agent.item(letter).cloned().expect("checked item");
        let info = item.info();
        let name = info.name.clone();
        match origin {
            Action::Eat => {
                self.consume(letter);
                self.message = format!("This {name} is delicious!");
                ev.push(Event::Ate { name });
                Flow::Done(true)
            }
            Action::Wear => {
                self.agent.worn.push(letter);
                self.message = format!("You are now wearing {}.", item.describe());
                ev.push(Event::Worn { name });
                Flow::Done(true)
            }
            Action::Wield => {
                self.agent.wielded = Some(letter);
                self.message = format!("{letter} - {} (weapon in hand).", item.describe());
                ev.push(Event::Wielded { name });
                Flow::Done(true)
            }
            Action::PutOn if info.category == Category::Ring => Flow::Ask(Prompt {
                question: "Which ring-finger, Right or Left? [rl]".into(),
                kind: PromptKind::Finger { item: letter },
            }),
            Action::PutOn => {
                self.agent.worn.push(letter);
                self.put_on_done(letter, ev)
            }
            Action::Quaff => {
                self.consume(letter);
                match info.effect {
                    Effect::Levitation => {
                        self.agent.levitation_timer = self.agent.levitation_timer.max(LEVITATION_TURNS);
                        self.message = "You start to float in the air!".into();
                    }
                    Effect::Heal => {
                        self.agent.hp = self.agent.hp_max;
                        self.message = "You feel better.".into();
                    }
                    _ => self.message = "This tastes like water.".into(),
                }
                ev.push(Event::Quaffed { name });
                Flow::Done(true)
            }
            Action::Zap | Action::Apply => Flow::Ask(Prompt {
                question: "In what direction?".into(),
                kind: PromptKind::DirectionSelect {
                    origin,
                    item: Some(letter),
                },
            }),
            _ => Flow::Done(false),
        }
    }

    fn directed(&mut self, origin: Action, item: Option<char>, d: Dir, ev: &mut Vec<Event>) -> Flow {
        let target = self.agent.pos.step(d);
        let t = self.terrain.get(target).copied();
        match origin {
            Action::Kick => {
                self.kick(target, ev);
                Flow::Done(true)
            }
            Action::Open => {
                self.message = match t {
                    Some(Terrain::ClosedDoor) if self.rng.chance(OPEN_CHANCE) => {
                        self.terrain[target] = Terrain::OpenDoor;
                        ev.push(Event::DoorOpened);
                        "The door opens."
                    }
                    Some(Terrain::ClosedDoor) => "The door is stuck.",
                    Some(Terrain::LockedDoor) => "This door is locked.",
                    Some(Terrain::OpenDoor) => "This door is already open.",
                    _ => "You see no door there.",
                }
                .into();
                Flow::Done(true)
            }
            Action::Zap | Action::Apply => {
                let Some(letter) = item else {
                    return self.never_mind();
                };
                let effect = match self.agent.item(letter) {
                    Some(i) => i.info().effect,
                    None => return self.never_mind(),
                };
                match effect {
                    Effect::Unlock => {
                        if t == Some(Terrain::LockedDoor) {
                            self.terrain[target] = Terrain::ClosedDoor;
                            self.message = "You succeed in unlocking the door.".into();
                            Flow::Done(true)
                        } else {
                            self.message = "You can't unlock that.".into();
                            Flow::Done(false)
                        }
                    }
                    Effect::Death | Effect::Cold | Effect::Damage(_) => {
                        self.ray(d, effect, ev);
                        Flow::Done(true)
                    }
                    _ => {
                        self.message = "Nothing happens.".into();
                        Flow::Done(true)
                    }
                }
            }
            _ => self.never_mind(),
        }
    }

    fn ray(&mut self, d: Dir, effect: Effect, ev: &mut Vec<Event>) {
        let mut c = self.agent.pos;
        for _ in 0..RAY_RANGE {
            c = c.step(d);
            let Some(&t) = self.terrain.get(c) else { break };
            if t.blocks_rays() {
                break;
            }
            match effect {
                Effect::Cold => match t {
                    Terrain::Lava => self.terrain[c] = Terrain::Floor,
                    Terrain::Water => self.terrain[c] = Terrain::Ice,
                    _ => {}
                },
                Effect::Death => {
                    if let Some(i) = self.monster_at(c) {
                        let m = self.monsters.remove(i);
                        self.message = format!("The death ray hits the {}! You kill it!", m.name());
                        ev.push(Event::Killed {
                            name: m.name().to_string(),
                        });
                        return;
                    }
                }
                Effect::Damage(dice) => {
                    if let Some(i) = self.monster_at(c) {
                        let dmg = dice.roll(&mut self.rng);
                        self.damage_monster(i, dmg, ev);
                        return;
                    }
                }
                _ => return,
            }
        }
        if self.message.is_empty() {
            self.message = match effect {
                Effect::Cold => "A cold ray shoots out.".into(),
                _ => "The ray fades.".into(),
            };
        }
    }

    fn kick(&mut self, target: Coord, ev: &mut Vec<Event>) {
        if let Some(i) = self.monster_at(target) {
            self.attack(i, ev);
            return;
        }
        if self.boulder_at(target) {
            self.message = "Ouch! That hurts!".into();
            return;
        }
        self.message = match self.terrain.get(target) {
            Some(Terrain::LockedDoor | Terrain::ClosedDoor) => {
                if self.rng.chance(KICK_CHANCE) {
                    self.terrain[target] = Terrain::Doorway;
                    ev.push(Event::DoorOpened);
                    "WHAMM!! The door crashes open!"
                } else {
                    "WHAMM!!"
                }
            }
            Some(t) if t.is_wall_like() => "Ouch! That hurts!",
            _ => "You kick at empty space.",
        }
        .into();
    }

    fn search(&mut self) {
        for n in self.agent.pos.neighbors8() {
            if self.terrain.get(n) == Some(&Terrain::SecretDoor) && self.rng.chance(SEARCH_CHANCE) {
                self.terrain[n] = Terrain::ClosedDoor;
                self.message = "You find a hidden door.".into();
            }
            if let Some(i) = self.traps.iter().position(|t| t.pos == n && !t.seen) {
                if self.rng.chance(SEARCH_CHANCE) {
                    self.traps[i].seen = true;
                    self.message = format!("You find a {}.", self.traps[i].kind.description());
                }
            }
        }
    }

    fn pick_up(&mut self, ev: &mut Vec<Event>) -> bool {
        let here: Vec<usize> = (0..self.items.len())
            .filter(|&i| self.items[i].pos == self.agent.pos)
            .collect();
        if here.is_empty() {
            self.message = "There is nothing here to pick up.".into();
            return false;
        }
        let mut taken = Vec::new();
        let mut notes = Vec::new();
        for i in here {
            let item = self.items[i].item.clone();
            match self.add_to_inventory(item.clone()) {
                Some(letter) => {
                    notes.push(format!("{letter} - {}.", item.describe()));
                    ev.push(Event::PickedUp {
                        name: item.info().name.clone(),
                    });
                    taken.push(i);
                }
                None => {
                    notes.push("You cannot carry any more.".into());
                    break;
                }
            }
        }
        for i in taken.into_iter().rev() {
            self.items.remove(i);
        }
        self.message = notes.join(" ");
        true
    }

    fn damage_monster(&mut self, i: usize, dmg: i64, ev: &mut Vec<Event>) {
        let m = &mut self.monsters[i];
        m.hp -= dmg;
        m.asleep = false;
        let name = m.name().to_string();
        if m.hp <= 0 {
            self.monsters.remove(i);
            self.message = format!("You kill the {name}!");
            ev.push(Event::Killed { name });
        } else {
            self.message = format!("You hit the {name}.");
        }
    }

    fn attack(&mut self, i: usize, ev: &mut Vec<Event>) {
        let dice = self
            .agent
            .wielded
            .and_then(|l| self.agent.item(l))
            .and_then(|it| match it.info().effect {
                Effect::Damage(d) => Some(d),
                _ => None,
            })
            .unwrap_or(UNARMED);
        let dmg = dice.roll(&mut self.rng);
        self.damage_monster(i, dmg, ev);
    }

    /// Resolves a move attempt; returns whether time advanced.
    fn do_move(&mut self, d: Dir, ev: &mut Vec<Event>) -> bool {
        self.facing = d;
        let from = self.agent.pos;
        let to = from.step(d);
        let Some(&t) = self.terrain.get(to) else {
            return false;
        };
        if let Some(i) = self.monster_at(to) {
            if self.monsters[i].hostile {
                self.attack(i, ev);
                return true;
            }
            self.message = format!("You stop. The {} is in your way.", self.monsters[i].name());
            return false;
        }
        if d.is_diagonal() && (door_blocks_diagonal(self.terrain[from]) || door_blocks_diagonal(t)) {
            return false;
        }
        if self.boulder_at(to) {
            return self.push_boulder(to, d, ev);
        }
        match t {
            Terrain::ClosedDoor => {
                if self.rng.chance(OPEN_CHANCE) {
                    self.terrain[to] = Terrain::OpenDoor;
                    self.message = "The door opens.".into();
                    ev.push(Event::DoorOpened);
                } else {
                    self.message = "The door is stuck.".into();
                }
                true
            }
            Terrain::LockedDoor => {
                self.message = "This door is locked.".into();
                false
            }
            Terrain::Water if !self.agent.levitating() => false,
            Terrain::Lava if !self.agent.levitating() => {
                self.agent.pos = to;
                ev.push(Event::ReachedCoord { coord: self.local(to) });
                self.message = "You fall into the lava!".into();
                self.die("lava", ev);
                true
            }
            t if t.is_walkable() || t.is_liquid() => {
                self.arrive(to, true, ev);
                true
            }
            _ => false,
        }
    }

    fn push_boulder(&mut self, at: Coord, d: Dir, ev: &mut Vec<Event>) -> bool {
        if d.is_diagonal() {
            self.message = "You try to move the boulder, but in vain.".into();
            return false;
        }
        let beyond = at.step(d);
        let Some(&bt) = self.terrain.get(beyond) else {
            return false;
        };
        if self.boulder_at(beyond) || self.monster_at(beyond).is_some() {
            self.message = "You try to move the boulder, but in vain.".into();
            return false;
        }
        let idx = self.boulders.iter().position(|b| *b == at).expect("boulder present");
        match bt {
            Terrain::Water => {
                self.boulders.remove(idx);
                self.terrain[beyond] = Terrain::Floor;
                self.message = "There is a large splash as the boulder fills a pool.".into();
            }
            Terrain::Lava => {
                self.boulders.remove(idx);
                self.message = "The boulder sinks into the lava.".into();
            }
            t if t.is_walkable() && !t.is_door() => {
                self.boulders[idx] = beyond;
                self.message = "With great effort you move the boulder.".into();
            }
            _ => {
                self.message = "You try to move the boulder, but in vain.".into();
                return false;
            }
        }
        if self.boulders_on_targets() {
            ev.push(Event::BouldersOnTargets);
        }
        self.arrive(at, true, ev);
        true
    }

    /// Every boulder rests on a fountain (and there is at least one).
    pub fn boulders_on_targets(&self) -> bool {
        !self.boulders.is_empty() && self.boulders.iter().all(|&b| self.terrain[b] == Terrain::Fountain)
    }

    fn local(&self, c: Coord) -> Coord {
        Coord::new(c.x - self.origin.x, c.y - self.origin.y)
    }

    fn arrive(&mut self, to: Coord, traps: bool, ev: &mut Vec<Event>) {
        self.agent.pos = to;
        ev.push(Event::ReachedCoord { coord: self.local(to) });
        let t = self.terrain[to];
        match t {
            Terrain::StairDown => ev.push(Event::ReachedStair {
                direction: "down".into(),
            }),
            Terrain::StairUp => ev.push(Event::ReachedStair { direction: "up".into() }),
            _ => {}
        }
        if t.is_feature() {
            ev.push(Event::ReachedFeature { kind: t.name().into() });
        }
        let note = {
            let mut here = self.items_at(to);
            match (here.next(), here.next()) {
                (Some(_), Some(_)) => Some("There are several objects here.".to_string()),
                (Some(first), None) => Some(format!("You see here {}.", first.item.describe())),
                _ => None,
            }
        };
        if let Some(note) = note {
            self.message = note;
        }
        if traps {
            self.trigger_trap(ev);
        }
    }

    fn trigger_trap(&mut self, ev: &mut Vec<Event>) {
        let pos = self.agent.pos;
        let Some(i) = self.traps.iter().position(|t| t.pos == pos) else {
            return;
        };
        let kind = self.traps[i].kind;
        if kind == TrapKind::Hole && self.agent.levitating() {
            return;
        }
        self.traps[i].seen = true;
        ev.push(Event::TrapTriggered {
            name: kind.name().into(),
        });
        match kind {
            TrapKind::Teleport => {
                let dest: Vec<Coord> = self
                    .terrain
                    .coords()
                    .filter(|&c| {
                        self.terrain[c].is_open_floor() && self.free_for_entity(c) && self.trap_at(c).is_none()
                    })
                    .collect();
                if let Some(&c) = self.rng.choose(&dest) {
                    self.message = "You feel a wrenching sensation.".into();
                    self.arrive(c, false, ev);
                }
            }
            TrapKind::Fire => self.message = "A tower of flame erupts from the floor!".into(),
            TrapKind::Hole => {
                self.message = "You fall through a hole!".into();
                self.done = Some(Termination::FellThrough);
            }
        }
    }

    fn monster_can_enter(&self, from: Coord, d: Dir) -> bool {
        let to = from.step(d);
        let Some(&t) = self.terrain.get(to) else {
            return false;
        };
        t.is_walkable()
            && !(d.is_diagonal() && (door_blocks_diagonal(self.terrain[from]) || door_blocks_diagonal(t)))
            && self.trap_at(to).is_none()
            && self.free_for_entity(to)
    }

    fn can_reach_agent(&self, from: Coord) -> bool {
        let a = self.agent.pos;
        if from.chebyshev(a) != 1 {
            return false;
        }
        let diagonal = from.x != a.x && from.y != a.y;
        !(diagonal && (door_blocks_diagonal(self.terrain[from]) || door_blocks_diagonal(self.terrain[a])))
    }

    /// First step of a shortest path from monster `i` toward the agent.
    fn chase_step(&self, i: usize) -> Option<Dir> {
        let start = self.monsters[i].pos;
        let (w, h) = (self.terrain.width(), self.terrain.height());
        let mut first: Grid<Option<Dir>> = Grid::new(w, h, None);
        let mut seen = Grid::new(w, h, false);
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            if self.can_reach_agent(c) {
                return first[c];
            }
            for d in Dir::ALL {
                let n = c.step(d);
                if !self.terrain.in_bounds(n) || seen[n] || !self.monster_can_enter(c, d) {
                    continue;
                }
                seen[n] = true;
                first[n] = first[c].or(Some(d));
                queue.push_back(n);
            }
        }
        None
    }

    fn wander(&mut self, i: usize) {
        let from = self.monsters[i].pos;
        let legal: Vec<Dir> = Dir::ALL
            .into_iter()
            .filter(|&d| self.monster_can_enter(from, d))
            .collect();
        if let Some(&d) = self.rng.choose(&legal) {
            self.monsters[i].pos = from.step(d);
        }
    }

    fn monster_phase(&mut self, ev: &mut Vec<Event>) {
        for i in 0..self.monsters.len() {
            if self.done.is_some() {
                return;
            }
            let m = &self.monsters[i];
            let info = m.info();
            if info.speed == 0 {
                continue;
            }
            if m.asleep {
                if m.pos.chebyshev(self.agent.pos) <= 1 {
                    self.monsters[i].asleep = false;
                }
                continue;
            }
            if !m.hostile {
                self.wander(i);
                continue;
            }
            if self.can_reach_agent(m.pos) {
                let name = info.name.clone();
                if info.instakill {
                    self.agent.hp = 0;
                    self.message = format!("The {name} hits! You die...");
                } else {
                    let dmg = info.damage.roll(&mut self.rng);
                    self.agent.hp = (self.agent.hp - dmg).max(0);
                    self.message = format!("The {name} hits!");
                }
                if self.agent.hp == 0 {
                    self.die(&name, ev);
                }
                continue;
            }
            let sees = line_of_sight(&self.terrain, m.pos, self.agent.pos);
            match sees.then(|| self.chase_step(i)).flatten() {
                Some(d) => {
                    let p = self.monsters[i].pos.step(d);
                    self.monsters[i].pos = p;
                }
                None => self.wander(i),
            }
        }
    }
}
