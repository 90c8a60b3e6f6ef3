//! Event-driven rewards and termination.
//!
//! A [`RewardConfig`] says which [`Event`]s pay out and which of them end the
//! episode; a [`RewardManager`] tracks progress through it over an episode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::geom::Coord;
use crate::observe::Observation;
use crate::terrain::Terrain;
use crate::world::{Action, Event, TrapKind};

/// Added on every step in which game time did not advance.
pub const STEP_PENALTY: f64 = -0.001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

/// Which event an [`EventSpec`] responds to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "name", rename_all = "snake_case")]
pub enum Matcher {
    Eat(String),
    Wield(String),
    Wear(String),
    PutOn(String),
    Quaff(String),
    PickUp(String),
    Kill(String),
    /// `up` or `down`.
    Stair(String),
    /// A feature terrain name such as `sink` or `fountain`.
    Location(String),
    /// A cell relative to the map area.
    Coord(Coord),
    Trap(String),
    Pray,
    DoorOpened,
    BouldersOnTargets,
}

fn object_matches(spec: &str, name: &str) -> bool {
    spec == name
        || Catalog::builtin()
            .objects
            .iter()
            .any(|o| o.name == name && o.full_name() == spec)
}

impl Matcher {
    pub fn matches(&self, e: &Event) -> bool {
        match (self, e) {
            (Matcher::Eat(s), Event::Ate { name })
            | (Matcher::Wield(s), Event::Wielded { name })
            | (Matcher::Wear(s), Event::Worn { name })
            | (Matcher::PutOn(s), Event::PutOn { name })
            | (Matcher::Quaff(s), Event::Quaffed { name })
            | (Matcher::PickUp(s), Event::PickedUp { name }) => object_matches(s, name),
            (Matcher::Kill(s), Event::Killed { name }) => s.eq_ignore_ascii_case(name),
            (Matcher::Stair(s), Event::ReachedStair { direction }) => s == direction,
            (Matcher::Location(s), Event::ReachedFeature { kind }) => s == kind,
            (Matcher::Coord(c), Event::ReachedCoord { coord }) => c == coord,
            (Matcher::Trap(s), Event::TrapTriggered { name }) => {
                TrapKind::from_name(s).is_some_and(|k| k.name() == name)
            }
            (Matcher::Pray, Event::Prayed)
            | (Matcher::DoorOpened, Event::DoorOpened)
            | (Matcher::BouldersOnTargets, Event::BouldersOnTargets) => true,
            _ => false,
        }
    }

    /// Checks that the names the matcher mentions exist.
    pub fn validate(&self) -> Result<(), RewardError> {
        let cat = Catalog::builtin();
        let ok = match self {
            Matcher::Eat(s)
            | Matcher::Wield(s)
            | Matcher::Wear(s)
            | Matcher::PutOn(s)
            | Matcher::Quaff(s)
            | Matcher::PickUp(s) => cat.object_by_name(s, None).is_some(),
            Matcher::Kill(s) => cat.monster_by_name(s).is_some(),
            Matcher::Stair(s) => s == "up" || s == "down",
            Matcher::Location(s) => Terrain::from_name(s).is_some_and(Terrain::is_feature),
            Matcher::Trap(s) => TrapKind::from_name(s).is_some(),
            Matcher::Coord(_) | Matcher::Pray | Matcher::DoorOpened | Matcher::BouldersOnTargets => true,
        };
        let name = match self {
            Matcher::Eat(s)
            | Matcher::Wield(s)
            | Matcher::Wear(s)
            | Matcher::PutOn(s)
            | Matcher::Quaff(s)
            | Matcher::PickUp(s)
            | Matcher::Kill(s)
            | Matcher::Stair(s)
            | Matcher::Location(s)
            | Matcher::Trap(s) => s.clone(),
            _ => String::new(),
        };
        if ok {
            Ok(())
        } else {
            Err(RewardError::UnknownEntity(name))
        }
    }
}

fn default_reward() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub matcher: Matcher,
    #[serde(default = "default_reward")]
    pub reward: f64,
    #[serde(default)]
    pub repeatable: bool,
    /// The episode ends once every required event has happened.
    #[serde(default = "yes")]
    pub terminal_required: bool,
    /// The episode ends as soon as this event happens.
    #[serde(default)]
    pub terminal_sufficient: bool,
}

impl EventSpec {
    pub fn new(matcher: Matcher) -> Self {
        EventSpec {
            matcher,
            reward: 1.0,
            repeatable: false,
            terminal_required: true,
            terminal_sufficient: false,
        }
    }

    pub fn reward(mut self, r: f64) -> Self {
        self.reward = r;
        self
    }

    pub fn repeatable(mut self, yes: bool) -> Self {
        self.repeatable = yes;
        self
    }

    pub fn required(mut self, yes: bool) -> Self {
        self.terminal_required = yes;
        self
    }

    pub fn sufficient(mut self, yes: bool) -> Self {
        self.terminal_sufficient = yes;
        self
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combinator {
    All,
    Any,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardConfig {
    /// +1 and done on reaching the down staircase.
    #[default]
    Default,
    Flat { events: Vec<EventSpec> },
    /// Events count only in the listed order.
    Sequential { events: Vec<EventSpec> },
    Grouped {
        children: Vec<RewardConfig>,
        combinator: Combinator,
    },
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        match self {
            RewardConfig::Default => Ok(()),
            RewardConfig::Flat { events } | RewardConfig::Sequential { events } => {
                events.iter().try_for_each(|e| e.matcher.validate())
            }
            RewardConfig::Grouped { children, .. } => children.iter().try_for_each(RewardConfig::validate),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Progress {
    Default { done: bool },
    Flat { fired: Vec<bool>, sufficient: bool },
    Sequential { next: usize },
    Grouped(Vec<Progress>),
}

impl Progress {
    fn new(cfg: &RewardConfig) -> Progress {
        match cfg {
            RewardConfig::Default => Progress::Default { done: false },
            RewardConfig::Flat { events } => Progress::Flat {
                fired: vec![false; events.len()],
                sufficient: false,
            },
            RewardConfig::Sequential { .. } => Progress::Sequential { next: 0 },
            RewardConfig::Grouped { children, .. } => Progress::Grouped(children.iter().map(Progress::new).collect()),
        }
    }

    /// Reward earned from `events` and whether the config is now complete.
    fn advance(&mut self, cfg: &RewardConfig, events: &[Event]) -> (f64, bool) {
        match (self, cfg) {
            (Progress::Default { done }, RewardConfig::Default) => {
                let mut r = 0.0;
                if !*done && events.iter().any(|e| Matcher::Stair("down".into()).matches(e)) {
                    *done = true;
                    r = 1.0;
                }
                (r, *done)
            }
            (Progress::Flat { fired, sufficient }, RewardConfig::Flat { events: specs }) => {
                let mut r = 0.0;
                for e in events {
                    for (i, s) in specs.iter().enumerate() {
                        if !s.matcher.matches(e) || (fired[i] && !s.repeatable) {
                            continue;
                        }
                        fired[i] = true;
                        r += s.reward;
                        *sufficient |= s.terminal_sufficient;
                    }
                }
                let mut required = specs.iter().zip(fired.iter()).filter(|(s, _)| s.terminal_required).peekable();
                let all_required = required.peek().is_some() && required.all(|(_, f)| *f);
                (r, *sufficient || all_required)
            }
            (Progress::Sequential { next }, RewardConfig::Sequential { events: specs }) => {
                let mut r = 0.0;
                for e in events {
                    if let Some(s) = specs.get(*next) {
                        if s.matcher.matches(e) {
                            r += s.reward;
                            *next += 1;
                        }
                    }
                }
                (r, !specs.is_empty() && *next >= specs.len())
            }
            (Progress::Grouped(kids), RewardConfig::Grouped { children, combinator }) => {
                let mut r = 0.0;
                let mut states = Vec::with_capacity(kids.len());
                for (p, c) in kids.iter_mut().zip(children) {
                    let (kr, kd) = p.advance(c, events);
                    r += kr;
                    states.push(kd);
                }
                let done = match combinator {
                    Combinator::All => !states.is_empty() && states.iter().all(|d| *d),
                    Combinator::Any => states.iter().any(|d| *d),
                };
                (r, done)
            }
            _ => unreachable!("progress mirrors its config"),
        }
    }
}

/// Reward and termination for one step.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct RewardOutcome {
    pub reward: f64,
    pub done: bool,
    /// The config's own termination rule fired (as opposed to death or timeout).
    pub goal: bool,
}

/// Hook receiving the previous observation, the action and the new observation.
pub type CustomReward = Box<dyn FnMut(&Observation, Action, &Observation) -> f64 + Send>;

pub struct RewardManager {
    config: RewardConfig,
    progress: Progress,
    custom: Vec<CustomReward>,
}

impl std::fmt::Debug for RewardManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RewardManager")
            .field("config", &self.config)
            .field("custom_hooks", &self.custom.len())
            .finish()
    }
}

impl Default for RewardManager {
    fn default() -> Self {
        RewardManager::new(RewardConfig::Default)
    }
}

impl RewardManager {
    pub fn new(config: RewardConfig) -> Self {
        RewardManager {
            progress: Progress::new(&config),
            config,
            custom: Vec::new(),
        }
    }

    pub fn config(&self) -> &RewardConfig {
        &self.config
    }

    /// Clears episode progress; hooks are kept.
    pub fn reset(&mut self) {
        self.progress = Progress::new(&self.config);
    }

    /// Appends an event, turning a default config into a flat one.
    pub fn add_event(&mut self, spec: EventSpec) -> Result<&mut Self, RewardError> {
        spec.matcher.validate()?;
        match &mut self.config {
            RewardConfig::Flat { events } | RewardConfig::Sequential { events } => events.push(spec),
            cfg => *cfg = RewardConfig::Flat { events: vec![spec] },
        }
        self.reset();
        Ok(self)
    }

    pub fn add_eat_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Eat(name.into())))
    }

    pub fn add_wield_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Wield(name.into())))
    }

    pub fn add_wear_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Wear(name.into())))
    }

    pub fn add_puton_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::PutOn(name.into())))
    }

    /// Puts on an amulet; amulets share the put-on command with rings.
    pub fn add_amulet_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_puton_event(name)
    }

    pub fn add_quaff_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Quaff(name.into())))
    }

    pub fn add_pickup_event(&mut self, name: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::PickUp(name.into())))
    }

    pub fn add_kill_event(&mut self, monster: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Kill(monster.into())))
    }

    pub fn add_location_event(&mut self, feature: &str) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Location(feature.into())))
    }

    pub fn add_coordinate_event(&mut self, at: Coord) -> Result<&mut Self, RewardError> {
        self.add_event(EventSpec::new(Matcher::Coord(at)))
    }

    /// Adjusts the most recently added event.
    pub fn last_event(&mut self) -> Option<&mut EventSpec> {
        match &mut self.config {
            RewardConfig::Flat { events } | RewardConfig::Sequential { events } => events.last_mut(),
            _ => None,
        }
    }

    pub fn add_custom(&mut self, hook: CustomReward) -> &mut Self {
        self.custom.push(hook);
        self
    }

    pub fn has_custom(&self) -> bool {
        !self.custom.is_empty()
    }

    /// Sum of all custom hooks for one transition.
    pub fn custom_reward(&mut self, prev: &Observation, action: Action, obs: &Observation) -> f64 {
        self.custom.iter_mut().map(|h| h(prev, action, obs)).sum()
    }

    /// Scores one engine step. `ended` reports that the engine itself ended
    /// the episode (death or a hole).
    pub fn evaluate(
        &mut self,
        events: &[Event],
        time_advanced: bool,
        ended: bool,
        step_count: u64,
        max_steps: u64,
    ) -> RewardOutcome {
        let (mut reward, goal) = self.progress.advance(&self.config, events);
        if !time_advanced {
            reward += STEP_PENALTY;
        }
        RewardOutcome {
            reward,
            done: goal || ended || step_count >= max_steps,
            goal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stair() -> Event {
        Event::ReachedStair {
            direction: "down".into(),
        }
    }

    fn ate(n: &str) -> Event {
        Event::Ate { name: n.into() }
    }

    #[test]
    fn default_stair() {
        let mut m = RewardManager::default();
        let o = m.evaluate(&[stair()], true, false, 1, 100);
        assert_eq!((o.reward, o.done), (1.0, true));
    }

    #[test]
    fn wall_bump_penalty() {
        let mut m = RewardManager::default();
        let o = m.evaluate(&[], false, false, 1, 100);
        assert_eq!((o.reward, o.done), (-0.001, false));
    }

    #[test]
    fn timeout_and_death_end_without_bonus() {
        let mut m = RewardManager::default();
        assert_eq!(m.evaluate(&[], true, false, 100, 100).reward, 0.0);
        assert!(m.evaluate(&[], true, false, 100, 100).done);
        let o = m.evaluate(&[Event::Died { cause: "lava".into() }], true, true, 1, 100);
        assert_eq!((o.reward, o.done, o.goal), (0.0, true, false));
    }

    #[test]
    fn flat_sink_penalty_and_required_pair() {
        let mut m = RewardManager::default();
        m.add_eat_event("apple").unwrap();
        m.add_wield_event("dagger").unwrap();
        m.add_location_event("sink").unwrap();
        *m.last_event().unwrap() = EventSpec::new(Matcher::Location("sink".into())).reward(-1.0).required(false);
        let sink = Event::ReachedFeature { kind: "sink".into() };
        assert_eq!(m.evaluate(std::slice::from_ref(&sink), true, false, 1, 100), RewardOutcome { reward: -1.0, done: false, goal: false });
        assert_eq!(m.evaluate(&[sink], true, false, 2, 100).reward, 0.0);
        assert!(!m.evaluate(&[ate("apple")], true, false, 3, 100).done);
        let o = m.evaluate(&[Event::Wielded { name: "dagger".into() }], true, false, 4, 100);
        assert_eq!((o.reward, o.done), (1.0, true));
    }

    #[test]
    fn maze_explore_shape() {
        let cfg = RewardConfig::Flat {
            events: vec![
                EventSpec::new(Matcher::Eat("apple".into())).reward(0.5).required(false),
                EventSpec::new(Matcher::Stair("down".into())).sufficient(true),
            ],
        };
        let mut m = RewardManager::new(cfg);
        assert_eq!(m.evaluate(&[ate("apple")], true, false, 1, 99).reward, 0.5);
        let o = m.evaluate(&[stair()], true, false, 2, 99);
        assert_eq!((o.reward, o.done), (1.0, true));
    }

    #[test]
    fn empty_flat_never_terminates() {
        let mut m = RewardManager::new(RewardConfig::Flat { events: vec![] });
        assert!(!m.evaluate(&[stair(), ate("apple")], true, false, 1, 99).done);
    }

    #[test]
    fn sequential_ignores_out_of_order() {
        let cfg = RewardConfig::Sequential {
            events: vec![
                EventSpec::new(Matcher::Eat("apple".into())),
                EventSpec::new(Matcher::Stair("down".into())),
            ],
        };
        let mut m = RewardManager::new(cfg);
        let o = m.evaluate(&[stair()], true, false, 1, 99);
        assert_eq!((o.reward, o.done), (0.0, false));
        assert_eq!(m.evaluate(&[ate("apple")], true, false, 2, 99).reward, 1.0);
        assert!(m.evaluate(&[stair()], true, false, 3, 99).done);
    }

    #[test]
    fn grouped_any_and_all() {
        let a = RewardConfig::Flat {
            events: vec![EventSpec::new(Matcher::Eat("apple".into()))],
        };
        let b = RewardConfig::Default;
        let mut any = RewardManager::new(RewardConfig::Grouped {
            children: vec![a.clone(), b.clone()],
            combinator: Combinator::Any,
        });
        assert!(any.evaluate(&[ate("apple")], true, false, 1, 99).done);
        let mut all = RewardManager::new(RewardConfig::Grouped {
            children: vec![a, b],
            combinator: Combinator::All,
        });
        assert!(!all.evaluate(&[ate("apple")], true, false, 1, 99).done);
        let o = all.evaluate(&[stair()], true, false, 2, 99);
        assert_eq!((o.reward, o.done), (1.0, true));
    }

    #[test]
    fn full_names_match() {
        let m = Matcher::Quaff("potion of levitation".into());
        assert!(m.matches(&Event::Quaffed { name: "levitation".into() }));
        assert!(!Matcher::Eat("apple".into()).matches(&ate("melon")));
    }

    #[test]
    fn unknown_names_rejected() {
        let mut m = RewardManager::default();
        assert_eq!(
            m.add_eat_event("unobtainium").unwrap_err(),
            RewardError::UnknownEntity("unobtainium".into())
        );
        assert!(m.add_kill_event("dragon-king").is_err());
        assert!(m.add_location_event("floor").is_err());
        assert!(m.add_kill_event("goblin").is_ok());
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = RewardConfig::Grouped {
            children: vec![
                RewardConfig::Default,
                RewardConfig::Sequential {
                    events: vec![EventSpec::new(Matcher::Coord(Coord::new(3, 4))).reward(0.5)],
                },
            ],
            combinator: Combinator::Any,
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RewardConfig>(&json).unwrap(), cfg);
        let parsed: RewardConfig =
            serde_json::from_str(r#"{"kind":"flat","events":[{"matcher":{"event":"eat","name":"apple"}}]}"#).unwrap();
        assert_eq!(parsed, RewardConfig::Flat { events: vec![EventSpec::new(Matcher::Eat("apple".into()))] });
    }
}
