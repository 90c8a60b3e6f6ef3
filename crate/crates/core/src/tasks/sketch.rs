//! A mutable character grid rendered as a des `MAP` block.

use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub(crate) struct Sketch {
    rows: Vec<Vec<char>>,
}

impl Sketch {
    pub fn new(w: usize, h: usize, fill: char) -> Self {
        Sketch {
            rows: vec![vec![fill; w]; h],
        }
    }

    pub fn width(&self) -> i32 {
        self.rows.first().map_or(0, |r| r.len() as i32)
    }

    pub fn height(&self) -> i32 {
        self.rows.len() as i32
    }

    pub fn get(&self, x: i32, y: i32) -> char {
        self.rows[y as usize][x as usize]
    }

    pub fn set(&mut self, x: i32, y: i32, ch: char) {
        self.rows[y as usize][x as usize] = ch;
    }

    pub fn fill(&mut self, x1: i32, y1: i32, x2: i32, y2: i32, ch: char) {
        for y in y1..=y2 {
            for x in x1..=x2 {
                self.set(x, y, ch);
            }
        }
    }

    /// Draws a room whose walls occupy the given rectangle.
    pub fn room(&mut self, x1: i32, y1: i32, x2: i32, y2: i32) {
        for x in x1..=x2 {
            self.set(x, y1, '-');
            self.set(x, y2, '-');
        }
        for y in y1 + 1..y2 {
            self.set(x1, y, '|');
            self.set(x2, y, '|');
        }
        self.fill(x1 + 1, y1 + 1, x2 - 1, y2 - 1, '.');
    }

    /// `MAZE` header, `MAP` block and a full-map `REGION`.
    pub fn des(&self, name: &str, lit: bool) -> String {
        let mut s = format!("MAZE: \"{name}\", ' '\nGEOMETRY:center,center\nMAP\n");
        for r in &self.rows {
            s.extend(r.iter());
            s.push('\n');
        }
        s.push_str("ENDMAP\n");
        let _ = writeln!(
            s,
            "REGION:(0,0,{},{}),{},\"ordinary\"",
            self.width() - 1,
            self.height() - 1,
            if lit { "lit" } else { "unlit" }
        );
        s
    }
}
