//! Des-file generators for the registered navigation and skill tasks.
//!
//! Each generator maps a seed to des source. Randomness that the des language
//! expresses well stays in the source; layout choices that need to respect
//! each other are made here from the seed.

use std::fmt::Write as _;

use crate::rng::GameRng;

use super::sketch::Sketch;

/// Options for the single-room tasks.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct RoomOptions {
    pub random: bool,
    pub dark: bool,
    pub monsters: usize,
    pub traps: usize,
}

pub fn room(n: i32, o: RoomOptions) -> String {
    let mut s = Sketch::new(n as usize + 2, n as usize + 2, ' ');
    s.room(0, 0, n + 1, n + 1);
    let mut des = s.des("room", !o.dark);
    if o.random {
        des.push_str("STAIR:random,down\n");
    } else {
        let _ = writeln!(des, "STAIR:({n},{n}),down");
        des.push_str("BRANCH:(1,1,1,1),(0,0,0,0)\n");
    }
    for _ in 0..o.monsters {
        des.push_str("MONSTER:random,random\n");
    }
    for _ in 0..o.traps {
        des.push_str("TRAP:\"teleport\",random\n");
    }
    des
}

/// Randomly placed rooms joined by `RANDOM_CORRIDORS`; the agent starts on
/// the up staircase of one room and the goal sits in another.
pub fn corridor(rooms: usize) -> String {
    let mut des = String::from("LEVEL: \"corridor\"\n\n");
    for i in 0..rooms {
        des.push_str("ROOM: \"ordinary\", lit, random, random, random {\n");
        match i {
            0 => des.push_str("  STAIR: random, up\n"),
            1 => des.push_str("  STAIR: random, down\n"),
            _ => {}
        }
        des.push_str("}\n\n");
    }
    des.push_str("RANDOM_CORRIDORS\n");
    des
}

/// A square room holding a locked inner room with the staircase. The key lies
/// somewhere in the outer room.
pub fn key_room(size: i32, fixed: bool, dark: bool, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let side = if size <= 5 { 3 } else { 5 };
    let mut s = Sketch::new(size as usize + 2, size as usize + 2, ' ');
    s.room(0, 0, size + 1, size + 1);
    let hi = size - side + 1;
    let (bx, by) = if fixed {
        (hi, hi)
    } else {
        (rng.range(1, hi), rng.range(1, hi))
    };
    s.room(bx, by, bx + side - 1, by + side - 1);
    let mid = side / 2;
    // Door candidates: wall cells of the inner room whose outside neighbour
    // is floor of the outer room.
    let mut doors = Vec::new();
    for k in 1..side - 1 {
        let sides = [
            ((bx + k, by), (bx + k, by - 1)),
            ((bx + k, by + side - 1), (bx + k, by + side)),
            ((bx, by + k), (bx - 1, by + k)),
            ((bx + side - 1, by + k), (bx + side, by + k)),
        ];
        for (door, out) in sides {
            if (1..=size).contains(&out.0) && (1..=size).contains(&out.1) {
                doors.push(door);
            }
        }
    }
    let door = if fixed {
        (bx, by + mid)
    } else {
        *rng.choose(&doors).expect("inner room always has a free side")
    };
    s.set(door.0, door.1, '+');
    let inside = |x: i32, y: i32| x >= bx && x < bx + side && y >= by && y < by + side;
    let outer: Vec<(i32, i32)> = (1..=size)
        .flat_map(|y| (1..=size).map(move |x| (x, y)))
        .filter(|&(x, y)| !inside(x, y))
        .collect();
    let (stair, key, start) = if fixed {
        ((bx + mid, by + mid), (1, size), (1, 1))
    } else {
        let stair = (rng.range(bx + 1, bx + side - 2), rng.range(by + 1, by + side - 2));
        let mut cells = outer.clone();
        rng.shuffle(&mut cells);
        (stair, cells[0], cells[1])
    };
    let mut des = s.des("keyroom", !dark);
    let _ = writeln!(des, "DOOR:locked,({},{})", door.0, door.1);
    let _ = writeln!(des, "STAIR:({},{}),down", stair.0, stair.1);
    let _ = writeln!(des, "OBJECT:('(',\"skeleton key\"),({},{})", key.0, key.1);
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}

/// A perfect maze carved by `MAZEWALK` over a `w` x `h` block.
pub fn maze_walk(w: usize, h: usize) -> String {
    let s = Sketch::new(w, h, ' ');
    let mut des = s.des("mazewalk", true);
    des.push_str("MAZEWALK:(0,1),east\nSTAIR:random,down\n");
    des
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RiverOptions {
    pub narrow: bool,
    pub monsters: bool,
    pub lava: bool,
}

/// Land on both banks of a river. One row is always water so that the bridge
/// boulders placed in it can fill the crossing.
pub fn river(o: RiverOptions, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let (w, h) = (18, 9);
    let rx = 7;
    let rw = if o.narrow { 1 } else { 2 };
    let mut s = Sketch::new(w as usize, h as usize, '.');
    let lane = rng.range(1, h - 2);
    for y in 0..h {
        let lava = o.lava && y != lane && rng.chance(0.5);
        for x in rx..rx + rw {
            s.set(x, y, if lava { 'L' } else { '}' });
        }
    }
    let mut des = s.des("river", true);
    let mut boulders = vec![(rx - 1, lane)];
    if !o.narrow {
        boulders.push((rx - 3, lane));
    }
    loop {
        let extra = (rng.range(1, rx - 2), rng.range(0, h - 1));
        if extra.1 != lane {
            boulders.push(extra);
            break;
        }
    }
    for (x, y) in &boulders {
        let _ = writeln!(des, "OBJECT:('`',\"boulder\"),({x},{y})");
    }
    let start = loop {
        let c = (rng.range(0, rx - 4), rng.range(0, h - 1));
        if !boulders.contains(&c) {
            break c;
        }
    };
    let right = rx + rw;
    let stair = (rng.range(right + 2, w - 1), rng.range(0, h - 1));
    let _ = writeln!(des, "STAIR:({},{}),down", stair.0, stair.1);
    if o.monsters {
        for _ in 0..2 {
            let _ = writeln!(
                des,
                "MONSTER:random,({},{})",
                rng.range(right, w - 1),
                rng.range(0, h - 1)
            );
        }
    }
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}

/// A field of clouds and trees with a powerful monster and the goal in
/// opposite corners.
pub fn hide_n_seek(w: i32, h: i32, lava: bool) -> String {
    let s = Sketch::new(w as usize, h as usize, '.');
    let (mx, my) = (w - 1, h - 1);
    let mut des = s.des("hidenseek", true);
    let _ = writeln!(des, "REPLACE_TERRAIN:(0,0,{mx},{my}), '.', 'C', 33%");
    let _ = writeln!(des, "REPLACE_TERRAIN:(0,0,{mx},{my}), '.', 'T', 25%");
    if lava {
        let _ = writeln!(des, "REPLACE_TERRAIN:(0,0,{mx},{my}), '.', 'L', 10%");
    }
    let _ = writeln!(des, "TERRAIN:randline (0,{my}),({mx},0), 5, '.'");
    let _ = writeln!(des, "TERRAIN:randline (0,0),({mx},{my}), 5, '.'");
    let _ = writeln!(
        des,
        "$center = selection: fillrect ({},{},{},{})",
        w / 2 - 1,
        h / 2 - 1,
        w / 2 + 1,
        h / 2 + 1
    );
    des.push_str("$apple_location = rndcoord $center\nOBJECT: ('%', \"apple\"), $apple_location\n");
    des.push_str("$monster = monster: { 'L','N','H','O','D','T' }\nSHUFFLE: $monster\n");
    let _ = writeln!(des, "$place = {{ ({mx},{my}),(0,{my}),({mx},0) }}");
    des.push_str("SHUFFLE: $place\nMONSTER: $monster[0], $place[0], hostile\nSTAIR:$place[2],down\n");
    des.push_str("BRANCH:(0,0,0,0),(1,1,1,1)\n");
    des
}

/// A small room, a one-cell corridor, and a long room holding a horde of rats
/// and the staircase.
pub fn corridor_battle(dark: bool) -> String {
    let mut s = Sketch::new(34, 5, ' ');
    s.room(0, 0, 4, 4);
    s.room(12, 0, 33, 4);
    s.fill(5, 2, 11, 2, '#');
    s.set(4, 2, '.');
    s.set(12, 2, '.');
    let mut des = s.des("corridorbattle", !dark);
    des.push_str("$hall = selection: fillrect (14,1,31,3)\n");
    des.push_str("LOOP [8] {\n  MONSTER:('r',\"sewer rat\"),rndcoord $hall,hostile\n}\n");
    des.push_str("STAIR:(32,2),down\nBRANCH:(2,2,2,2),(0,0,0,0)\n");
    des
}

/// Cue monsters for the memory task, one per fork branch.
pub const MEMENTO_CUES: [&str; 4] = ["newt", "jackal", "kobold", "gnome"];

/// A lit room with a sleeping cue monster, a dark corridor and a fork. The
/// branch matching the cue leads to a grid bug; the others hide a hole.
pub fn memento(short: bool, forks: usize, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let len = if short { 5 } else { 14 };
    let (h, mid, rows): (i32, i32, &[i32]) = if forks == 2 {
        (9, 4, &[1, 7])
    } else {
        (13, 6, &[1, 4, 8, 11])
    };
    let xf = 5 + len;
    let w = xf + 6;
    let mut s = Sketch::new(w as usize, h as usize, ' ');
    s.room(0, mid - 2, 4, mid + 2);
    s.set(4, mid, '.');
    s.fill(5, mid, xf - 1, mid, '#');
    s.fill(xf, rows[0], xf, rows[rows.len() - 1], '#');
    for &r in rows {
        s.fill(xf + 1, r, xf + 4, r, '#');
    }
    let answer = rng.below(rows.len());
    let cue = MEMENTO_CUES[answer];
    let class = crate::catalog::Catalog::builtin()
        .monster_by_name(cue)
        .map(|id| crate::catalog::Catalog::builtin().monsters[id].class)
        .unwrap_or('?');
    let mut des = s.des("memento", false);
    let _ = writeln!(des, "REGION:(0,{},4,{}),lit,\"ordinary\"", mid - 2, mid + 2);
    let _ = writeln!(des, "MONSTER:('{class}',\"{cue}\"),(2,{}),asleep,peaceful", mid - 1);
    for (i, &r) in rows.iter().enumerate() {
        if i == answer {
            let _ = writeln!(des, "MONSTER:('x',\"grid bug\"),({},{r}),asleep", xf + 4);
        } else {
            let _ = writeln!(des, "TRAP:\"hole\",({},{r})", xf + 2);
        }
    }
    let _ = writeln!(des, "BRANCH:(1,{0},1,{0}),(0,0,0,0)", mid + 1);
    des
}

/// Two mazes separated by a wall. The staircase sits in a gap of that wall;
/// the second maze leads to a room of apples.
pub fn maze_explore(hard: bool, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let (w, h, sep, far) = if hard { (41, 15, 16, 34) } else { (25, 9, 10, 20) };
    let mut s = Sketch::new(w as usize, h as usize, ' ');
    s.fill(sep, 0, sep, h - 1, '|');
    s.room(far, 0, w - 1, h - 1);
    let odd = |rng: &mut GameRng, lo: i32, hi: i32| 2 * rng.range(lo / 2, (hi - 1) / 2) + 1;
    let gap = odd(&mut rng, 1, h - 2);
    let stair = loop {
        let y = odd(&mut rng, 1, h - 2);
        if y != gap {
            break y;
        }
    };
    let door = odd(&mut rng, 1, h - 2);
    let start = (odd(&mut rng, 1, sep - 1), odd(&mut rng, 1, h - 2));
    let mut des = s.des("mazeexplore", true);
    des.push_str("MAZEWALK:(0,1),east\n");
    let _ = writeln!(des, "MAZEWALK:({sep},{gap}),east");
    let _ = writeln!(des, "TERRAIN:({sep},{stair}),'.'");
    let _ = writeln!(des, "TERRAIN:({far},{door}),'.'");
    let _ = writeln!(des, "STAIR:({sep},{stair}),down");
    let _ = writeln!(des, "$pantry = selection: fillrect ({0},1,{0},{1})", w - 2, h - 2);
    des.push_str("LOOP [3] {\n  OBJECT:('%',\"apple\"),rndcoord $pantry\n}\n");
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}

/// What the single-object skill rooms revolve around.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SkillItem {
    Apple,
    Altar,
    Armor,
}

/// A 5x5 room with one object or an altar; `distract` adds a random object
/// and a random monster.
pub fn skill_room(item: SkillItem, fixed: bool, distract: bool) -> String {
    let mut s = Sketch::new(7, 7, ' ');
    s.room(0, 0, 6, 6);
    let mut des = s.des("skill", true);
    let at = if fixed { "(3,3)" } else { "random" };
    match item {
        SkillItem::Apple => {
            let _ = writeln!(des, "OBJECT:('%',\"apple\"),{at}");
        }
        SkillItem::Altar => {
            let _ = writeln!(des, "ALTAR:{at},neutral,altar");
        }
        SkillItem::Armor => {
            let _ = writeln!(des, "OBJECT:('[',\"leather armor\"),{at}");
        }
    }
    if distract {
        des.push_str("OBJECT:random,random\nMONSTER:random,random\n");
    }
    if fixed {
        des.push_str("BRANCH:(1,1,1,1),(0,0,0,0)\n");
    }
    des
}

/// Two rooms split by a wall with a locked door; the staircase is behind it.
pub fn locked_door(random: bool, seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let mut s = Sketch::new(9, 5, ' ');
    s.room(0, 0, 8, 4);
    s.fill(5, 0, 5, 4, '|');
    s.set(5, 0, '-');
    s.set(5, 4, '-');
    let (door, start, stair) = if random {
        (
            rng.range(1, 3),
            (rng.range(1, 4), rng.range(1, 3)),
            (rng.range(6, 7), rng.range(1, 3)),
        )
    } else {
        (2, (1, 2), (7, 2))
    };
    s.set(5, door, '+');
    let mut des = s.des("lockeddoor", true);
    let _ = writeln!(des, "DOOR:locked,(5,{door})");
    let _ = writeln!(des, "STAIR:({},{}),down", stair.0, stair.1);
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}

/// Des object specs for the lava-crossing tools.
pub const LEVITATION_ITEMS: [&str; 3] = ["('!',\"levitation\")", "('=',\"levitation\")", "('[',\"levitation boots\")"];
pub const FREEZING_ITEMS: [&str; 2] = ["('(',\"frost horn\")", "('/',\"cold\")"];

/// A room cut by a two-column lava river. `items` lists the candidate tools;
/// one is drawn per seed and placed on the near bank.
pub fn lava_cross(items: &[&str], seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let mut s = Sketch::new(13, 7, ' ');
    s.room(0, 0, 12, 6);
    s.fill(6, 1, 7, 5, 'L');
    let mut des = s.des("lavacross", true);
    let start = (rng.range(1, 4), rng.range(1, 5));
    let stair = (rng.range(9, 11), rng.range(1, 5));
    if let Some(item) = rng.choose(items) {
        des.push_str("$bank = selection: fillrect (1,1,4,5)\n");
        let _ = writeln!(des, "OBJECT:{item},rndcoord $bank");
    }
    let _ = writeln!(des, "STAIR:({},{}),down", stair.0, stair.1);
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", start.0, start.1);
    des
}

/// A room with the agent and a sleeping minotaur.
pub fn wod_easy(seed: u64) -> String {
    let mut rng = GameRng::new(seed);
    let mut s = Sketch::new(11, 7, ' ');
    s.room(0, 0, 10, 6);
    let mut des = s.des("wod", true);
    let _ = writeln!(des, "MONSTER:('H',\"minotaur\"),({},{}),asleep", rng.range(6, 9), rng.range(1, 5));
    let _ = writeln!(des, "BRANCH:({0},{1},{0},{1}),(0,0,0,0)", rng.range(1, 3), rng.range(1, 5));
    des
}

/// A room with the wand, a corridor held by a minotaur, and the goal room.
pub fn wod_corridor(asleep: bool) -> String {
    let mut s = Sketch::new(22, 5, ' ');
    s.room(0, 0, 6, 4);
    s.room(17, 0, 21, 4);
    s.fill(7, 2, 16, 2, '#');
    s.set(6, 2, '.');
    s.set(17, 2, '.');
    let mut des = s.des("wod", true);
    des.push_str("$den = selection: fillrect (1,1,5,3)\n");
    des.push_str("OBJECT:('/',\"death\"),rndcoord $den\n");
    let _ = writeln!(
        des,
        "MONSTER:('H',\"minotaur\"),(12,2){}",
        if asleep { ",asleep" } else { ",hostile" }
    );
    des.push_str("STAIR:(20,2),down\nBRANCH:(1,1,5,3),(0,0,0,0)\n");
    des
}

/// The labyrinth with a minotaur guarding its centre.
pub const LABYRINTH: &str = "\
--------------------
|.......|.|........|
|.-----.|.|.-----|.|
|.|...|.|.|......|.|
|.|.|.|.|.|-----.|.|
|.|.|...|....|.|.|.|
|.|.--------.|.|.|.|
|.|..........|...|.|
|.|--------------|.|
|..................|
--------------------";

pub fn wod_pro() -> String {
    let mut des = String::from("MAZE: \"wod\", ' '\nGEOMETRY:center,center\nMAP\n");
    des.push_str(LABYRINTH);
    des.push_str("\nENDMAP\nREGION:(0,0,19,10),lit,\"ordinary\"\n");
    des.push_str("STAIR:(14,5),down\nMONSTER:('H',\"minotaur\"),(14,6),asleep\n");
    des.push_str("OBJECT:('/',\"death\"),random\nBRANCH:(9,1,9,1),(0,0,0,0)\n");
    des
}
