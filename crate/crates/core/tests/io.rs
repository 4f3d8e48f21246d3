mod common;

use common::*;
use folknet::io::{read_matrix, read_triples_from, tree_dot, tree_json, write_matrix, write_triples, TripleFormat};
use folknet::model::build_network;
use folknet::percolation::{build_tree, FilterGrid};
use folknet::projection::CorrelationMatrix;
use folknet::{EntityKind, TagNormalization};

type NamedLink = (String, String, String);

/// Two blocks {a, b, c} and {d, e}: 0.8 inside, 0.1 across.
fn two_blocks() -> CorrelationMatrix {
    let names: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
    let block = |i: usize| usize::from(i >= 3);
    let mut v = vec![0.0; 25];
    for a in 0..5 {
        for b in 0..5 {
            v[a * 5 + b] = if a == b {
                1.0
            } else if block(a) == block(b) {
                0.8
            } else {
                0.1
            };
        }
    }
    CorrelationMatrix::from_dense(EntityKind::Tag, names, v).unwrap()
}

#[test]
fn triples_round_trip_in_both_formats() {
    let mut rng = rng(13);
    let events = random_events(&mut rng, 80, 7, 9, 12);
    let original = build_network(&events, TagNormalization::Exact).network;
    for format in [TripleFormat::Tsv, TripleFormat::Csv] {
        let mut buf = Vec::new();
        write_triples(&mut buf, &events, format).unwrap();
        let read = read_triples_from(&buf[..], format, true).unwrap();
        assert!(read.warnings.is_empty());
        let again = build_network(&read.events, TagNormalization::Exact).network;
        let links = |n: &folknet::TripartiteNetwork| -> Vec<NamedLink> {
            let mut v: Vec<_> = n
                .links()
                .map(|l| {
                    (
                        n.users().names()[l.user].clone(),
                        n.items().names()[l.item].clone(),
                        n.tags().names()[l.tag].clone(),
                    )
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(links(&original), links(&again));
    }
}

#[test]
fn matrix_round_trip_within_print_precision() {
    let mut rng = rng(31);
    let c = random_matrix(&mut rng, 12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_matrix(&c, &path).unwrap();
    let (names, values) = read_matrix(&path).unwrap();
    assert_eq!(names, c.names());
    for a in 0..12 {
        for b in 0..12 {
            assert!((values[a * 12 + b] - c.get(a, b)).abs() <= 5e-7);
        }
    }
}

#[test]
fn json_shows_two_blocks_at_mid_level() {
    let tree = build_tree(&two_blocks(), &FilterGrid::default());
    let doc = tree_json(&tree, None).unwrap();
    let islands = doc["islands"].as_array().unwrap();
    let mid = doc["levels"]
        .as_array()
        .unwrap()
        .iter()
        .position(|l| l.as_f64().unwrap() == 0.5)
        .unwrap();
    let mut blocks: Vec<Vec<String>> = islands
        .iter()
        .filter(|i| i["level"] == mid && i["singleton"] == false)
        .map(|i| i["members"].as_array().unwrap().iter().map(|m| m.as_str().unwrap().to_owned()).collect())
        .collect();
    blocks.sort();
    assert_eq!(blocks, vec![vec!["a", "b", "c"], vec!["d", "e"]]);
    assert!(islands.iter().filter(|i| i["level"] == 0).all(|i| i["parent"].is_null()));
}

#[test]
fn dot_labels_blocks_by_characteristic_element() {
    let tree = build_tree(&two_blocks(), &FilterGrid::default());
    let dot = tree_dot(&tree, None, false).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("label=\"a\""));
    assert!(dot.contains("label=\"d\""));
    assert!(dot.contains("root -> n0;"));
    assert!(!dot.contains("fillcolor"));
    let with_singletons = tree_dot(&tree, None, true).unwrap();
    assert!(with_singletons.lines().count() > dot.lines().count());
}
