use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geom::Dir;

/// One agent input. Commands that need an item, a direction or a
/// confirmation open a prompt that follow-up actions resolve.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Move(Dir),
    Search,
    Kick,
    Open,
    Eat,
    PickUp,
    Apply,
    Wear,
    Wield,
    PutOn,
    Quaff,
    Zap,
    Pray,
    Read,
    Confirm(bool),
    MenuSelect(char),
    Direction(Dir),
}

const COMMANDS: [(Action, &str); 13] = [
    (Action::Search, "search"),
    (Action::Kick, "kick"),
    (Action::Open, "open"),
    (Action::Eat, "eat"),
    (Action::PickUp, "pickup"),
    (Action::Apply, "apply"),
    (Action::Wear, "wear"),
    (Action::Wield, "wield"),
    (Action::PutOn, "puton"),
    (Action::Quaff, "quaff"),
    (Action::Zap, "zap"),
    (Action::Pray, "pray"),
    (Action::Read, "read"),
];

impl Action {
    /// Stable wire name, e.g. `move_ne`, `zap`, `yes`, `menu_f`, `dir_w`.
    pub fn name(self) -> String {
        match self {
            Action::Move(d) => format!("move_{}", d.name()),
            Action::Direction(d) => format!("dir_{}", d.name()),
            Action::Confirm(true) => "yes".into(),
            Action::Confirm(false) => "no".into(),
            Action::MenuSelect(c) => format!("menu_{c}"),
            a => COMMANDS
                .iter()
                .find(|(b, _)| *b == a)
                .map(|(_, n)| n.to_string())
                .unwrap_or_default(),
        }
    }

    pub fn from_name(s: &str) -> Option<Action> {
        if let Some(d) = s.strip_prefix("move_") {
            return Dir::from_name(d).map(Action::Move);
        }
        if let Some(d) = s.strip_prefix("dir_") {
            return Dir::from_name(d).map(Action::Direction);
        }
        if let Some(c) = s.strip_prefix("menu_") {
            let mut it = c.chars();
            return match (it.next(), it.next()) {
                (Some(c), None) if c.is_ascii_alphabetic() || c == '$' => Some(Action::MenuSelect(c)),
                _ => None,
            };
        }
        match s {
            "yes" => Some(Action::Confirm(true)),
            "no" => Some(Action::Confirm(false)),
            _ => COMMANDS.iter().find(|(_, n)| *n == s).map(|(a, _)| *a),
        }
    }

    pub fn moves() -> Vec<Action> {
        Dir::ALL.into_iter().map(Action::Move).collect()
    }

    /// The eight moves plus search, kick, open and eat.
    pub fn navigation() -> Vec<Action> {
        let mut v = Action::moves();
        v.extend([Action::Search, Action::Kick, Action::Open, Action::Eat]);
        v
    }

    /// Moves, every command, yes/no, and the menu letters the skill tasks use.
    pub fn skill() -> Vec<Action> {
        let mut v = Action::moves();
        v.extend(COMMANDS.iter().map(|(a, _)| *a));
        v.extend([Action::Confirm(true), Action::Confirm(false)]);
        v.extend("abcdelr".chars().map(Action::MenuSelect));
        v
    }

    /// Every named action: moves, commands, confirmations, menu letters and directions.
    pub fn all() -> Vec<Action> {
        let mut v = Action::moves();
        v.extend(COMMANDS.iter().map(|(a, _)| *a));
        v.extend([Action::Confirm(true), Action::Confirm(false)]);
        v.extend(('a'..='z').chain('A'..='Z').chain(['$']).map(Action::MenuSelect));
        v.extend(Dir::ALL.into_iter().map(Action::Direction));
        v
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Action::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown action `{s}`")))
    }
}
