//! Brute-force oracles and fixtures shared by the integration tests. None of
//! this goes through the projection or percolation code it checks.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use folknet::percolation::FilterGrid;
use folknet::projection::{CorrelationMatrix, View};
use folknet::{EntityKind, TaggingEvent, TripartiteNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random events over small name pools, so (user, item) pairs repeat.
pub fn random_events(rng: &mut ChaCha8Rng, count: usize, users: usize, items: usize, tags: usize) -> Vec<TaggingEvent> {
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=3usize).min(tags);
            let mut chosen: Vec<String> = Vec::new();
            while chosen.len() < k {
                let t = format!("t{}", rng.random_range(0..tags));
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
            TaggingEvent::new(
                format!("u{}", rng.random_range(0..users)),
                format!("i{}", rng.random_range(0..items)),
                chosen,
            )
        })
        .collect()
}

/// Dense signature of `id` under `view`, summed straight from the links.
pub fn dense_signature(net: &TripartiteNetwork, view: View, id: usize) -> Vec<f64> {
    let mut v = vec![0.0; net.count(view.axis())];
    for link in net.links() {
        let w = *link.weight.numer() as f64 / *link.weight.denom() as f64;
        let (owner, coord) = match view {
            View::UsersViaItems => (link.user, link.item),
            View::ItemsViaUsers => (link.item, link.user),
            View::ItemsViaTags => (link.item, link.tag),
            View::TagsViaItems => (link.tag, link.item),
        };
        if owner == id {
            v[coord] += w;
        }
    }
    v
}

pub fn dense_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

/// Symmetric random matrix with unit diagonal; entries rounded to two
/// decimals so that many of them land exactly on grid levels.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CorrelationMatrix {
    let mut v = vec![0.0; n * n];
    for a in 0..n {
        v[a * n + a] = 1.0;
        for b in a + 1..n {
            let x = (rng.random_range(0..100) as f64) / 100.0;
            v[a * n + b] = x;
            v[b * n + a] = x;
        }
    }
    let names = (0..n).map(|i| format!("m{i}")).collect();
    CorrelationMatrix::from_dense(EntityKind::Tag, names, v).unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleIsland {
    pub level: usize,
    pub phi: f64,
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub characteristic: usize,
}

/// Whole island tree by definition: edges by comparing every entry with φ,
/// components by transitive closure of the adjacency relation.
pub fn oracle_tree(c: &CorrelationMatrix, grid: &FilterGrid) -> (Vec<f64>, Vec<OracleIsland>) {
    let n = c.len();
    let ids = c.members();
    let mut levels = Vec::new();
    let mut islands: Vec<OracleIsland> = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    let mut t = 0;
    loop {
        let phi = grid.level(t);
        if phi >= 1.0 {
            break;
        }
        let mut reach = vec![vec![false; n]; n];
        for a in 0..n {
            reach[a][a] = true;
            for b in 0..n {
                if a != b && c.get(a, b) > phi {
                    reach[a][b] = true;
                }
            }
        }
        for k in 0..n {
            for a in 0..n {
                if reach[a][k] {
                    for b in 0..n {
                        if reach[k][b] {
                            reach[a][b] = true;
                        }
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 0..n {
            let members: Vec<usize> = (0..n).filter(|&b| reach[a][b]).collect();
            let key = members.iter().map(|&p| ids[p]).min().unwrap();
            groups.entry(key).or_insert(members);
        }
        let mut owner = vec![0; n];
        let mut all_single = true;
        for positions in groups.values() {
            let mut positions = positions.clone();
            positions.sort_by_key(|&p| ids[p]);
            all_single &= positions.len() == 1;
            let id = islands.len();
            for &p in &positions {
                owner[p] = id;
            }
            let mut best = positions[0];
            let mut best_sum = f64::NEG_INFINITY;
            for &i in &positions {
                let s: f64 = positions.iter().map(|&j| c.get(i, j)).sum();
                if s > best_sum {
                    best_sum = s;
                    best = i;
                }
            }
            islands.push(OracleIsland {
                level: t,
                phi,
                members: positions.iter().map(|&p| ids[p]).collect(),
                parent: (t > 0).then(|| prev[positions[0]]),
                characteristic: ids[best],
            });
        }
        levels.push(phi);
        prev = owner;
        if all_single {
            break;
        }
        t += 1;
    }
    (levels, islands)
}

/// Label of every tag at one tree level (island id), indexed like `order`.
pub fn level_labels(tree: &folknet::IslandTree, level: usize, order: &[usize]) -> Vec<usize> {
    let mut label = BTreeMap::new();
    for island in tree.islands_at(level) {
        for &m in &island.members {
            label.insert(m, island.id);
        }
    }
    order.iter().map(|m| label[m]).collect()
}
