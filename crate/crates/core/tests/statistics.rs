use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use hackbox::compiler::{compile_first, PlacementKind};
use hackbox::dsl::parse_document;
use hackbox::geom::{Coord, Dir};
use hackbox::world::{Action, Event, World};

fn p_uniform<K>(counts: &BTreeMap<K, u64>, categories: usize) -> f64 {
    let total: u64 = counts.values().sum();
    let expected = total as f64 / categories as f64;
    let missing = (categories - counts.len()) as f64 * expected;
    let chi2: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>() + missing;
    ChiSquared::new((categories - 1) as f64).unwrap().sf(chi2)
}

#[test]
fn dice_index_is_uniform() {
    let src = "MAZE: \"t\", ' '\nMAP\n....\nENDMAP\n$o = object: { \"apple\", \"orange\", \"banana\", \"carrot\" }\n\
               OBJECT: $o[1d4 - 1], (0,0)\n";
    let doc = parse_document(src).unwrap();
    let mut counts = BTreeMap::new();
    for seed in 0..100_000 {
        let bp = compile_first(&doc, seed).unwrap();
        let p = bp.placements_of(PlacementKind::Object).next().unwrap();
        *counts.entry(p.name.clone()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 4);
    let p = p_uniform(&counts, 4);
    assert!(p > 0.001, "p = {p}, counts {counts:?}");
}

#[test]
fn teleport_destination_is_uniform() {
    let src = "MAZE: \"t\", ' '\nMAP\n-------\n|.....|\n|.....|\n|.....|\n-------\nENDMAP\n\
               REGION:(0,0,6,4),lit,\"ordinary\"\nBRANCH:(1,1,1,1),(0,0,0,0)\nTRAP:\"teleport\",(2,1)\n";
    let bp = compile_first(&parse_document(src).unwrap(), 0).unwrap();
    let mut counts: BTreeMap<Coord, u64> = BTreeMap::new();
    for seed in 0..14_000 {
        let mut w = World::from_blueprint(&bp, seed).unwrap();
        let out = w.step(Action::Move(Dir::E)).unwrap();
        assert!(out.events.contains(&Event::TrapTriggered {
            name: "teleport".into()
        }));
        *counts.entry(w.agent.pos).or_insert(0) += 1;
    }
    let trap = Coord::new(w_origin(&bp).x + 2, w_origin(&bp).y + 1);
    assert!(!counts.contains_key(&trap));
    assert_eq!(counts.len(), 14, "{counts:?}");
    let p = p_uniform(&counts, 14);
    assert!(p > 0.001, "p = {p}");
}

fn w_origin(bp: &hackbox::compiler::LevelBlueprint) -> Coord {
    Coord::new(bp.map_area.x1, bp.map_area.y1)
}
