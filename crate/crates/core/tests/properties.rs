use std::collections::HashSet;

use proptest::prelude::*;

use hackbox::builder::{LevelBuilder, Shape};
use hackbox::compiler::{compile_first, PlacementKind};
use hackbox::dsl::{parse_document, print_document, walk_stmts, DoorState};
use hackbox::env::Env;
use hackbox::geom::{Coord, Dir};
use hackbox::observe::{observe, ObsValue, KEYS};
use hackbox::reward::{EventSpec, Matcher, RewardConfig, RewardManager};
use hackbox::tasks::Overrides;
use hackbox::terrain::Terrain;
use hackbox::world::{Action, Event, World};

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/data/des/{name}.des", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const CORPUS: [&str; 4] = ["rivers", "simple_maze", "hide_and_seek", "oracle"];

#[test]
fn corpus_reprints_to_equal_trees() {
    for name in CORPUS {
        let doc = parse_document(&corpus(name)).unwrap();
        let again = parse_document(&print_document(&doc)).unwrap();
        assert_eq!(doc, again, "{name}");
    }
}

#[test]
fn corpus_spans_lie_inside_source() {
    for name in CORPUS {
        let src = corpus(name);
        let lines: Vec<&str> = src.lines().collect();
        let doc = parse_document(&src).unwrap();
        for level in &doc.levels {
            walk_stmts(&level.commands, &mut |s| {
                let l = s.span.line as usize;
                assert!(l >= 1 && l <= lines.len(), "{name}: {:?}", s.span);
                let len = lines[l - 1].chars().count() as u32;
                assert!(s.span.column >= 1 && s.span.column <= len.max(1), "{name}: {:?}", s.span);
            });
        }
    }
}

#[test]
fn secret_doors_are_terrain() {
    let src = corpus("simple_maze");
    assert!(src.contains('S'));
    let doc = parse_document(&src).unwrap();
    for seed in 0..50 {
        let bp = compile_first(&doc, seed).unwrap();
        assert!(bp.terrain.as_slice().contains(&Terrain::SecretDoor), "seed {seed}");
        let mut w = World::from_blueprint(&bp, seed).unwrap();
        w.reveal_map();
        let text = hackbox::observe::render_text(&w);
        assert!(!text.contains('S'), "seed {seed}");
    }
}

#[derive(Clone, Debug)]
enum Op {
    Object(usize, Option<Coord>),
    Monster(usize, Option<Coord>, bool),
    Trap(usize, Option<Coord>),
    Sink(Option<Coord>),
    Fountain(Option<Coord>),
    Altar(Option<Coord>),
    Door(usize, Option<Coord>),
    Fill(usize, char, Coord, Coord),
    Start(Coord),
    Goal(Option<Coord>),
}

const OBJECTS: [(&str, Option<char>); 6] = [
    ("apple", Some('%')),
    ("dagger", None),
    ("death", Some('/')),
    ("levitation", Some('=')),
    ("", Some('%')),
    ("", None),
];
const MONSTERS: [&str; 4] = ["goblin", "newt", "grid bug", ""];
const TRAPS: [&str; 4] = ["teleport", "fire", "hole", ""];
const DOORS: [DoorState; 4] = [DoorState::Open, DoorState::Closed, DoorState::Locked, DoorState::NoDoor];
const SHAPES: [Shape; 3] = [Shape::Line, Shape::Rect, Shape::FillRect];

fn coord(w: i32, h: i32) -> impl Strategy<Value = Coord> + Clone {
    (0..w, 0..h).prop_map(|(x, y)| Coord::new(x, y))
}

fn op(w: i32, h: i32) -> impl Strategy<Value = Op> {
    let at = proptest::option::of(coord(w, h));
    prop_oneof![
        (0..OBJECTS.len(), at.clone()).prop_map(|(i, a)| Op::Object(i, a)),
        (0..MONSTERS.len(), at.clone(), any::<bool>()).prop_map(|(i, a, s)| Op::Monster(i, a, s)),
        (0..TRAPS.len(), at.clone()).prop_map(|(i, a)| Op::Trap(i, a)),
        at.clone().prop_map(Op::Sink),
        at.clone().prop_map(Op::Fountain),
        at.clone().prop_map(Op::Altar),
        (0..DOORS.len(), at.clone()).prop_map(|(i, a)| Op::Door(i, a)),
        (0..SHAPES.len(), prop::sample::select(vec!['.', 'T', '}', 'L', '-', '#']), coord(w, h), coord(w, h))
            .prop_map(|(s, c, a, b)| Op::Fill(s, c, a, b)),
        coord(w, h).prop_map(Op::Start),
        at.prop_map(Op::Goal),
    ]
}

fn apply(b: &mut LevelBuilder, op: &Op) {
    let r = match *op {
        Op::Object(i, at) => b.add_object(OBJECTS[i].0, OBJECTS[i].1, at).map(|_| ()),
        Op::Monster(i, at, asleep) => {
            let flags: &[&str] = if asleep { &["asleep"] } else { &[] };
            b.add_monster(MONSTERS[i], at, flags).map(|_| ())
        }
        Op::Trap(i, at) => b.add_trap(TRAPS[i], at).map(|_| ()),
        Op::Sink(at) => b.add_sink(at).map(|_| ()),
        Op::Fountain(at) => b.add_fountain(at).map(|_| ()),
        Op::Altar(at) => b.add_altar(at).map(|_| ()),
        Op::Door(i, at) => b.add_door(DOORS[i], at).map(|_| ()),
        Op::Fill(s, c, from, to) => b.fill_terrain(SHAPES[s], c, from, to).map(|_| ()),
        Op::Start(at) => b.set_start_pos(at).map(|_| ()),
        Op::Goal(at) => b.add_goal_pos(at).map(|_| ()),
    };
    r.unwrap();
}

fn level_ops() -> impl Strategy<Value = (i32, i32, Vec<Op>)> {
    (3..20i32, 3..12i32).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(op(w, h), 0..16)))
}

/// Distinct explicit cells for objects, monsters and traps on a plain room.
fn explicit_layout() -> impl Strategy<Value = (i32, i32, Vec<(usize, Coord)>)> {
    (4..20i32, 4..12i32).prop_flat_map(|(w, h)| {
        let cells = prop::collection::hash_set(coord(w, h), 1..8).prop_map(|s| {
            let mut v: Vec<Coord> = s.into_iter().collect();
            v.sort();
            v
        });
        (Just(w), Just(h), cells, prop::collection::vec(0..3usize, 8)).prop_map(|(w, h, cells, kinds)| {
            let placed = cells.into_iter().zip(kinds).map(|(c, k)| (k, c)).collect();
            (w, h, placed)
        })
    })
}

fn admits(kind: PlacementKind, t: Terrain) -> bool {
    match kind {
        PlacementKind::Object | PlacementKind::Monster => t.is_walkable(),
        PlacementKind::Trap => t.is_open_floor(),
        PlacementKind::Feature => t.is_feature(),
    }
}

fn occupancy_unique(w: &World) -> bool {
    let mut seen = HashSet::new();
    seen.insert(w.agent.pos)
        && w.monsters.iter().all(|m| seen.insert(m.pos))
        && w.boulders.iter().all(|b| seen.insert(*b))
}

fn object_units(w: &World) -> u64 {
    let floor: u64 = w.items.iter().map(|i| i.item.quantity as u64).sum();
    let carried: u64 = w.agent.inventory.iter().map(|(_, i)| i.quantity as u64).sum();
    floor + carried
}

const PLAY_TASKS: [&str; 12] = [
    "Room-Ultimate-15x15",
    "KeyRoom-S5",
    "River-MonsterLava",
    "Eat-Distract",
    "Wear-Distract",
    "Pray-Distract",
    "LavaCross-Levitate-Potion-PickUp",
    "WoD-Hard",
    "CorridorBattle",
    "Boxoban-Medium",
    "MultiRoom-N4-Extreme",
    "HideNSeek-Lava",
];

fn grid(v: &ObsValue) -> &hackbox::observe::IntGrid {
    v.as_grid().unwrap()
}

fn check_observation(w: &World, crop: usize) {
    let obs = observe(w, &KEYS, crop).unwrap();
    let chars = grid(obs.get("chars").unwrap());
    let ids = grid(obs.get("ids").unwrap());
    let colors = grid(obs.get("colors").unwrap());
    let (gw, gh) = (w.terrain.width(), w.terrain.height());
    for y in 0..gh {
        for x in 0..gw {
            assert_eq!(ids.get(x, y) != 0, chars.get(x, y) != ' ' as i64, "cell ({x},{y})");
            if chars.get(x, y) == ' ' as i64 {
                assert_eq!(colors.get(x, y), 0);
            }
        }
    }
    let r = (crop / 2) as i32;
    for (full, cropped) in [("chars", "chars_crop"), ("colors", "colors_crop"), ("ids", "ids_crop")] {
        let f = grid(obs.get(full).unwrap());
        let c = grid(obs.get(cropped).unwrap());
        for cy in 0..crop {
            for cx in 0..crop {
                let p = Coord::new(w.agent.pos.x - r + cx as i32, w.agent.pos.y - r + cy as i32);
                if p.x >= 0 && p.y >= 0 && (p.x as usize) < gw && (p.y as usize) < gh {
                    assert_eq!(c.get(cx, cy), f.get(p.x as usize, p.y as usize), "{cropped} ({cx},{cy})");
                }
            }
        }
    }
    let stats = obs.get("stats").unwrap().as_vector().unwrap();
    assert_eq!(stats.len(), 25);
    assert_eq!((stats[0], stats[1]), (w.agent.pos.x as i64, w.agent.pos.y as i64));
}

fn flat3(flags: [(bool, bool); 3]) -> RewardConfig {
    let matchers = [Matcher::Eat("apple".into()), Matcher::Pray, Matcher::DoorOpened];
    RewardConfig::Flat {
        events: matchers
            .into_iter()
            .zip(flags)
            .map(|(m, (req, suf))| EventSpec::new(m).required(req).sufficient(suf))
            .collect(),
    }
}

fn event(i: usize) -> Event {
    match i {
        0 => Event::Ate { name: "apple".into() },
        1 => Event::Prayed,
        _ => Event::DoorOpened,
    }
}

/// Rewards up to and including the terminating step, plus that step's index.
fn flat_oracle(flags: [(bool, bool); 3], steps: &[Vec<usize>]) -> (Vec<f64>, Option<usize>) {
    let mut fired = [false; 3];
    let mut rewards = Vec::new();
    for (t, step) in steps.iter().enumerate() {
        let mut r = 0.0;
        let mut sufficient = false;
        for &e in step {
            if !fired[e] {
                fired[e] = true;
                r += 1.0;
                sufficient |= flags[e].1;
            }
        }
        rewards.push(r);
        let any_required = flags.iter().any(|f| f.0);
        let all_required = (0..3).all(|i| !flags[i].0 || fired[i]);
        if sufficient || (any_required && all_required) {
            return (rewards, Some(t));
        }
    }
    (rewards, None)
}

fn run_manager(cfg: &RewardConfig, steps: &[Vec<usize>]) -> (Vec<f64>, Option<usize>) {
    let mut m = RewardManager::new(cfg.clone());
    let mut rewards = Vec::new();
    for (t, step) in steps.iter().enumerate() {
        let events: Vec<Event> = step.iter().map(|&i| event(i)).collect();
        let out = m.evaluate(&events, true, false, t as u64 + 1, 1000);
        rewards.push(out.reward);
        if out.done {
            return (rewards, Some(t));
        }
    }
    (rewards, None)
}

#[test]
fn flat_termination_matches_truth_table() {
    let subsets: Vec<Vec<usize>> = (0..8u8).map(|m| (0..3).filter(|i| m & (1 << i) != 0).collect()).collect();
    for cfg_bits in 0..64u32 {
        let flags: [(bool, bool); 3] = std::array::from_fn(|i| (cfg_bits >> (2 * i) & 1 == 1, cfg_bits >> (2 * i + 1) & 1 == 1));
        let cfg = flat3(flags);
        for a in &subsets {
            for b in &subsets {
                for c in &subsets {
                    let steps = [a.clone(), b.clone(), c.clone()];
                    assert_eq!(run_manager(&cfg, &steps), flat_oracle(flags, &steps), "{flags:?} {steps:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn builder_output_round_trips((w, h, ops) in level_ops()) {
        let mut b = LevelBuilder::new(w as usize, h as usize);
        for o in &ops {
            apply(&mut b, o);
        }
        let des = b.get_des();
        let doc = parse_document(&des).unwrap();
        prop_assert_eq!(&parse_document(&des).unwrap(), &doc);
        let again = parse_document(&print_document(&doc)).unwrap();
        prop_assert_eq!(doc, again);
    }

    #[test]
    fn explicit_coordinates_survive((w, h, placed) in explicit_layout(), seed in any::<u64>()) {
        let mut b = LevelBuilder::new(w as usize, h as usize);
        for &(k, c) in &placed {
            match k {
                0 => b.add_object("apple", Some('%'), Some(c)).unwrap(),
                1 => b.add_monster("goblin", Some(c), &["asleep"]).unwrap(),
                _ => b.add_trap("fire", Some(c)).unwrap(),
            };
        }
        b.add_object("", None, None).unwrap().add_monster("", None, &[]).unwrap().add_trap("", None).unwrap();
        let bp = compile_first(&parse_document(&b.get_des()).unwrap(), seed).unwrap();
        let o = bp.map_area;
        let kinds = [PlacementKind::Object, PlacementKind::Monster, PlacementKind::Trap];
        for (i, &(k, c)) in placed.iter().enumerate() {
            let p = bp.placements.iter().filter(|p| p.kind == kinds[k]).nth(
                placed[..i].iter().filter(|(k2, _)| *k2 == k).count(),
            ).unwrap();
            prop_assert_eq!(p.pos, Coord::new(o.x1 + c.x, o.y1 + c.y));
        }
        for p in &bp.placements {
            prop_assert!(o.contains(p.pos), "{:?} outside {:?}", p, o);
        }
    }

    #[test]
    fn parsing_is_deterministic(i in 0..CORPUS.len()) {
        let src = corpus(CORPUS[i]);
        prop_assert_eq!(parse_document(&src).unwrap(), parse_document(&src).unwrap());
    }

    #[test]
    fn compile_is_deterministic_and_admissible(i in 0..CORPUS.len(), seed in any::<u64>()) {
        let doc = parse_document(&corpus(CORPUS[i])).unwrap();
        let a = compile_first(&doc, seed).unwrap();
        prop_assert_eq!(&a, &compile_first(&doc, seed).unwrap());
        for p in &a.placements {
            let t = *a.terrain.get(p.pos).unwrap();
            prop_assert!(admits(p.kind, t), "{} {:?} on {:?}", CORPUS[i], p, t);
        }
    }

    #[test]
    fn seeds_change_blueprints(i in 0..CORPUS.len(), base in 0u64..1 << 40) {
        let doc = parse_document(&corpus(CORPUS[i])).unwrap();
        let mut distinct: Vec<hackbox::compiler::LevelBlueprint> = Vec::new();
        for seed in base..base + 100 {
            let bp = compile_first(&doc, seed).unwrap();
            if !distinct.contains(&bp) {
                distinct.push(bp);
                if distinct.len() >= 2 {
                    break;
                }
            }
        }
        prop_assert!(distinct.len() >= 2);
    }

    #[test]
    fn flat_rewards_replay_exactly(
        flags in prop::array::uniform3((any::<bool>(), any::<bool>())),
        steps in prop::collection::vec(prop::collection::vec(0..3usize, 0..3), 0..12),
    ) {
        let cfg = flat3(flags);
        prop_assert_eq!(run_manager(&cfg, &steps), run_manager(&cfg, &steps));
    }

    #[test]
    fn sequential_ignores_out_of_order(order in Just(vec![0usize, 1, 2]).prop_shuffle(), stream in prop::collection::vec(0..3usize, 0..12)) {
        let specs: Vec<EventSpec> = order.iter().map(|&i| match i {
            0 => EventSpec::new(Matcher::Eat("apple".into())),
            1 => EventSpec::new(Matcher::Pray),
            _ => EventSpec::new(Matcher::DoorOpened),
        }).collect();
        let mut m = RewardManager::new(RewardConfig::Sequential { events: specs });
        let mut next = 0;
        for (t, &e) in stream.iter().enumerate() {
            let out = m.evaluate(&[event(e)], true, false, t as u64 + 1, 1000);
            if next < 3 && order[next] == e {
                next += 1;
                prop_assert_eq!(out.reward, 1.0);
            } else {
                prop_assert_eq!(out.reward, 0.0);
            }
            prop_assert_eq!(out.done, next == 3);
            if out.done {
                break;
            }
        }
    }

    #[test]
    fn death_ray_hits_nearest(
        xs in prop::collection::btree_set(2..19i32, 1..5),
        wall in proptest::option::of(2..19i32),
    ) {
        let mut row: Vec<char> = ".".repeat(18).chars().collect();
        if let Some(wx) = wall {
            if !xs.contains(&wx) {
                row[(wx - 1) as usize] = '|';
            }
        }
        let inner: String = row.into_iter().collect();
        let map = format!("--------------------\n|{inner}|\n--------------------");
        let mut extra = "BRANCH:(1,1,1,1),(0,0,0,0)\n".to_string();
        for x in &xs {
            extra.push_str(&format!("MONSTER:('o',\"goblin\"),({x},1),asleep\n"));
        }
        let src = format!("MAZE: \"t\", ' '\nMAP\n{map}\nENDMAP\nREGION:(0,0,19,2),lit,\"ordinary\"\n{extra}");
        let bp = compile_first(&parse_document(&src).unwrap(), 0).unwrap();
        let mut w = World::from_blueprint(&bp, 0).unwrap();
        let o = w.origin();
        let letter = w.give("wand of death").unwrap();
        let before: Vec<Coord> = w.monsters.iter().map(|m| m.pos).collect();
        let out = w.use_item(Action::Zap, letter, Some(Dir::E)).unwrap();
        let blocked = |x: i32| wall.is_some_and(|wx| !xs.contains(&wx) && wx < x);
        let victim = xs.iter().copied().find(|&x| !blocked(x));
        let killed = out.events.iter().filter(|e| matches!(e, Event::Killed { .. })).count();
        prop_assert_eq!(killed, usize::from(victim.is_some()));
        let expected: Vec<Coord> = before
            .into_iter()
            .filter(|p| Some(p.x - o.x) != victim)
            .collect();
        let after: Vec<Coord> = w.monsters.iter().map(|m| m.pos).collect();
        prop_assert_eq!(after, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn world_invariants_hold_under_random_play(
        task in 0..PLAY_TASKS.len(),
        seed in any::<u64>(),
        actions in prop::collection::vec(any::<prop::sample::Index>(), 1..300),
        crop in prop::sample::select(vec![1usize, 3, 5, 9, 15]),
    ) {
        let mut env = Env::make(PLAY_TASKS[task], &Overrides::default()).unwrap();
        env.reset(seed).unwrap();
        let n = env.actions().len();
        let w = env.world().unwrap();
        let units = object_units(w);
        let mut consumed = 0u64;
        prop_assert!(occupancy_unique(w));
        check_observation(w, crop);
        for a in actions {
            let clock = env.world().unwrap().clock;
            let t = env.step_index(a.index(n)).unwrap();
            let w = env.world().unwrap();
            prop_assert!(occupancy_unique(w), "overlap after {:?}", t.info.events);
            prop_assert_eq!(w.clock - clock, u64::from(t.info.time_advanced));
            if w.prompt.is_some() {
                prop_assert!(!t.info.time_advanced);
            }
            for (v, r) in w.visible.as_slice().iter().zip(w.remembered.as_slice()) {
                prop_assert!(!v || *r);
            }
            consumed += t
                .info
                .events
                .iter()
                .filter(|e| matches!(e, Event::Ate { .. } | Event::Quaffed { .. }))
                .count() as u64;
            prop_assert_eq!(object_units(w) + consumed, units);
            check_observation(w, crop);
            if t.done {
                break;
            }
        }
    }

    #[test]
    fn mapped_variants_share_dynamics(
        pair in prop::sample::select(vec![
            ("MazeWalk-9x9", "MazeWalk-Mapped-9x9"),
            ("MazeWalk-15x15", "MazeWalk-Mapped-15x15"),
            ("MazeExplore-Easy", "MazeExplore-Easy-Mapped"),
            ("HideNSeek", "HideNSeek-Mapped"),
        ]),
        seed in any::<u64>(),
        actions in prop::collection::vec(any::<prop::sample::Index>(), 1..200),
    ) {
        let mut plain = Env::make(pair.0, &Overrides::default()).unwrap();
        let mut mapped = Env::make(pair.1, &Overrides::default()).unwrap();
        plain.reset(seed).unwrap();
        mapped.reset(seed).unwrap();
        prop_assert_eq!(plain.actions(), mapped.actions());
        let (a, b) = (plain.world().unwrap(), mapped.world().unwrap());
        prop_assert_eq!(&a.terrain, &b.terrain);
        prop_assert!(b.remembered.as_slice().iter().all(|r| *r));
        let n = plain.actions().len();
        for i in actions {
            let ta = plain.step_index(i.index(n)).unwrap();
            let tb = mapped.step_index(i.index(n)).unwrap();
            prop_assert_eq!(&ta.info, &tb.info);
            prop_assert_eq!(ta.reward.to_bits(), tb.reward.to_bits());
            prop_assert_eq!(ta.done, tb.done);
            let (a, b) = (plain.world().unwrap(), mapped.world().unwrap());
            prop_assert_eq!(a.agent.pos, b.agent.pos);
            prop_assert_eq!(&a.monsters, &b.monsters);
            prop_assert_eq!(&a.items, &b.items);
            prop_assert_eq!(&a.visible, &b.visible);
            if ta.done {
                break;
            }
        }
    }
}
