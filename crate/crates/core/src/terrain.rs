use serde::{Deserialize, Serialize};

/// Terminal color codes in the 16-color palette.
pub mod color {
    pub const BLACK: u8 = 0;
    pub const RED: u8 = 1;
    pub const GREEN: u8 = 2;
    pub const BROWN: u8 = 3;
    pub const BLUE: u8 = 4;
    pub const MAGENTA: u8 = 5;
    pub const CYAN: u8 = 6;
    pub const GRAY: u8 = 7;
    pub const ORANGE: u8 = 9;
    pub const BRIGHT_GREEN: u8 = 10;
    pub const YELLOW: u8 = 11;
    pub const BRIGHT_BLUE: u8 = 12;
    pub const BRIGHT_MAGENTA: u8 = 13;
    pub const BRIGHT_CYAN: u8 = 14;
    pub const WHITE: u8 = 15;

    pub fn from_name(name: &str) -> Option<u8> {
        Some(match name {
            "black" => BLACK,
            "red" => RED,
            "green" => GREEN,
            "brown" => BROWN,
            "blue" => BLUE,
            "magenta" => MAGENTA,
            "cyan" => CYAN,
            "gray" => GRAY,
            "orange" => ORANGE,
            "bright-green" => BRIGHT_GREEN,
            "yellow" => YELLOW,
            "bright-blue" => BRIGHT_BLUE,
            "bright-magenta" => BRIGHT_MAGENTA,
            "bright-cyan" => BRIGHT_CYAN,
            "white" => WHITE,
            _ => return None,
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Solid,
    Floor,
    WallH,
    WallV,
    Corridor,
    /// Empty or broken doorway.
    Doorway,
    ClosedDoor,
    OpenDoor,
    LockedDoor,
    SecretDoor,
    Lava,
    Water,
    Ice,
    Tree,
    Cloud,
    StairDown,
    StairUp,
    Sink,
    Fountain,
    Altar,
}

impl Terrain {
    pub const ALL: [Terrain; 20] = [
        Terrain::Solid,
        Terrain::Floor,
        Terrain::WallH,
        Terrain::WallV,
        Terrain::Corridor,
        Terrain::Doorway,
        Terrain::ClosedDoor,
        Terrain::OpenDoor,
        Terrain::LockedDoor,
        Terrain::SecretDoor,
        Terrain::Lava,
        Terrain::Water,
        Terrain::Ice,
        Terrain::Tree,
        Terrain::Cloud,
        Terrain::StairDown,
        Terrain::StairUp,
        Terrain::Sink,
        Terrain::Fountain,
        Terrain::Altar,
    ];

    /// Terrain for a character in a MAP block or a terrain literal.
    pub fn from_map_char(c: char) -> Option<Terrain> {
        Some(match c {
            ' ' => Terrain::Solid,
            '.' => Terrain::Floor,
            '-' => Terrain::WallH,
            '|' => Terrain::WallV,
            '#' => Terrain::Corridor,
            '+' => Terrain::ClosedDoor,
            'S' => Terrain::SecretDoor,
            'L' => Terrain::Lava,
            'W' | 'P' | '}' => Terrain::Water,
            'I' => Terrain::Ice,
            'T' => Terrain::Tree,
            'C' => Terrain::Cloud,
            '>' => Terrain::StairDown,
            '<' => Terrain::StairUp,
            'K' => Terrain::Sink,
            '{' => Terrain::Fountain,
            '_' => Terrain::Altar,
            _ => return None,
        })
    }

    /// Canonical MAP character; kinds without one map to their closest analogue.
    pub fn map_char(self) -> char {
        match self {
            Terrain::Solid => ' ',
            Terrain::Floor | Terrain::Doorway => '.',
            Terrain::WallH => '-',
            Terrain::WallV => '|',
            Terrain::Corridor => '#',
            Terrain::ClosedDoor | Terrain::OpenDoor | Terrain::LockedDoor => '+',
            Terrain::SecretDoor => 'S',
            Terrain::Lava => 'L',
            Terrain::Water => 'W',
            Terrain::Ice => 'I',
            Terrain::Tree => 'T',
            Terrain::Cloud => 'C',
            Terrain::StairDown => '>',
            Terrain::StairUp => '<',
            Terrain::Sink => 'K',
            Terrain::Fountain => '{',
            Terrain::Altar => '_',
        }
    }

    /// Display glyph and color as seen by the player. Secret and locked doors
    /// deliberately look like what they pretend to be.
    pub fn glyph(self) -> (char, u8) {
        use color::*;
        match self {
            Terrain::Solid => (' ', BLACK),
            Terrain::Floor => ('.', GRAY),
            Terrain::WallH | Terrain::SecretDoor => ('-', GRAY),
            Terrain::WallV => ('|', GRAY),
            Terrain::Corridor => ('#', GRAY),
            Terrain::Doorway => ('.', BROWN),
            Terrain::ClosedDoor | Terrain::LockedDoor => ('+', BROWN),
            Terrain::OpenDoor => ('|', BROWN),
            Terrain::Lava => ('}', RED),
            Terrain::Water => ('}', BLUE),
            Terrain::Ice => ('.', CYAN),
            Terrain::Tree => ('#', GREEN),
            Terrain::Cloud => ('#', GRAY),
            Terrain::StairDown => ('>', GRAY),
            Terrain::StairUp => ('<', GRAY),
            Terrain::Sink => ('#', GRAY),
            Terrain::Fountain => ('{', BLUE),
            Terrain::Altar => ('_', GRAY),
        }
    }

    /// The kind an observer believes the cell to be.
    pub fn apparent(self) -> Terrain {
        match self {
            Terrain::SecretDoor => Terrain::WallH,
            Terrain::LockedDoor => Terrain::ClosedDoor,
            t => t,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Terrain::Solid => "stone",
            Terrain::Floor => "floor",
            Terrain::WallH | Terrain::WallV | Terrain::SecretDoor => "wall",
            Terrain::Corridor => "corridor",
            Terrain::Doorway => "doorway",
            Terrain::ClosedDoor | Terrain::LockedDoor => "closed door",
            Terrain::OpenDoor => "open door",
            Terrain::Lava => "molten lava",
            Terrain::Water => "water",
            Terrain::Ice => "ice",
            Terrain::Tree => "tree",
            Terrain::Cloud => "cloud",
            Terrain::StairDown => "staircase down",
            Terrain::StairUp => "staircase up",
            Terrain::Sink => "sink",
            Terrain::Fountain => "fountain",
            Terrain::Altar => "altar",
        }
    }

    /// Blocks line of sight.
    pub fn is_opaque(self) -> bool {
        matches!(
            self,
            Terrain::Solid
                | Terrain::WallH
                | Terrain::WallV
                | Terrain::ClosedDoor
                | Terrain::LockedDoor
                | Terrain::SecretDoor
                | Terrain::Tree
                | Terrain::Cloud
        )
    }

    /// Ground a walker can stand on without any special ability.
    pub fn is_walkable(self) -> bool {
        matches!(
            self,
            Terrain::Floor
                | Terrain::Corridor
                | Terrain::Doorway
                | Terrain::OpenDoor
                | Terrain::Ice
                | Terrain::Cloud
                | Terrain::StairDown
                | Terrain::StairUp
                | Terrain::Sink
                | Terrain::Fountain
                | Terrain::Altar
        )
    }

    pub fn is_wall_like(self) -> bool {
        matches!(
            self,
            Terrain::Solid | Terrain::WallH | Terrain::WallV | Terrain::SecretDoor | Terrain::Tree
        )
    }

    pub fn is_door(self) -> bool {
        matches!(
            self,
            Terrain::Doorway
                | Terrain::ClosedDoor
                | Terrain::OpenDoor
                | Terrain::LockedDoor
                | Terrain::SecretDoor
        )
    }

    pub fn is_liquid(self) -> bool {
        matches!(self, Terrain::Lava | Terrain::Water)
    }

    /// Stops rays from wands and horns.
    pub fn blocks_rays(self) -> bool {
        matches!(
            self,
            Terrain::Solid
                | Terrain::WallH
                | Terrain::WallV
                | Terrain::ClosedDoor
                | Terrain::LockedDoor
                | Terrain::SecretDoor
                | Terrain::Tree
        )
    }

    /// Special features that placements of kind "feature" create.
    pub fn is_feature(self) -> bool {
        matches!(
            self,
            Terrain::StairDown | Terrain::StairUp | Terrain::Sink | Terrain::Fountain | Terrain::Altar
        )
    }

    /// Plain ground that random placements and teleports may target.
    pub fn is_open_floor(self) -> bool {
        matches!(self, Terrain::Floor | Terrain::Corridor | Terrain::Ice)
    }

    pub fn name(self) -> &'static str {
        match self {
            Terrain::Solid => "solid",
            Terrain::Floor => "floor",
            Terrain::WallH => "wall_h",
            Terrain::WallV => "wall_v",
            Terrain::Corridor => "corridor",
            Terrain::Doorway => "doorway",
            Terrain::ClosedDoor => "closed_door",
            Terrain::OpenDoor => "open_door",
            Terrain::LockedDoor => "locked_door",
            Terrain::SecretDoor => "secret_door",
            Terrain::Lava => "lava",
            Terrain::Water => "water",
            Terrain::Ice => "ice",
            Terrain::Tree => "tree",
            Terrain::Cloud => "cloud",
            Terrain::StairDown => "stair_down",
            Terrain::StairUp => "stair_up",
            Terrain::Sink => "sink",
            Terrain::Fountain => "fountain",
            Terrain::Altar => "altar",
        }
    }

    pub fn from_name(s: &str) -> Option<Terrain> {
        Terrain::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_chars_roundtrip_for_canonical_kinds() {
        for t in Terrain::ALL {
            let c = t.map_char();
            let back = Terrain::from_map_char(c).unwrap();
            match t {
                Terrain::Doorway => assert_eq!(back, Terrain::Floor),
                Terrain::OpenDoor | Terrain::LockedDoor => assert_eq!(back, Terrain::ClosedDoor),
                _ => assert_eq!(back, t),
            }
        }
    }

    #[test]
    fn clouds_block_sight_but_not_movement() {
        assert!(Terrain::Cloud.is_opaque());
        assert!(Terrain::Cloud.is_walkable());
        assert!(Terrain::Tree.is_opaque());
        assert!(!Terrain::Tree.is_walkable());
    }

    #[test]
    fn names_are_unique() {
        for t in Terrain::ALL {
            assert_eq!(Terrain::from_name(t.name()), Some(t));
        }
    }
}
