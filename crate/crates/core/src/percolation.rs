//! Threshold percolation over a correlation matrix.
//!
//! At filter level φ two members are linked iff their correlation is
//! strictly greater than φ. Sweeping φ upward erodes links and the
//! connected components ("islands") split; linking every island to the
//! island containing it one level down gives the branching tree.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{EntityKind, Error, Result};
use crate::projection::CorrelationMatrix;

/// Filter levels `start, start + step, start + 2·step, ...`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterGrid {
    start: f64,
    step: f64,
}

impl Default for FilterGrid {
    fn default() -> Self {
        FilterGrid {
            start: 0.0,
            step: 0.05,
        }
    }
}

impl FilterGrid {
    pub fn new(start: f64, step: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&start) || !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid { start, step });
        }
        Ok(FilterGrid { start, step })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Level `t`, snapped to 12 decimals so that e.g. level 18 of the
    /// default grid is exactly `0.9`.
    pub fn level(&self, t: usize) -> f64 {
        let raw = self.start + t as f64 * self.step;
        (raw * 1e12).round() / 1e12
    }
}

/// Undirected edges `(a, b)`, `a < b`, between row positions whose
/// correlation exceeds `phi`. Sorted.
pub fn filter_edges(c: &CorrelationMatrix, phi: f64) -> Result<Vec<(usize, usize)>> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::InvalidThreshold(phi));
    }
    let mut edges: Vec<(usize, usize)> = c
        .upper_entries()
        .filter(|&(_, _, v)| v > phi)
        .map(|(a, b, _)| (a, b))
        .collect();
    edges.sort_unstable();
    Ok(edges)
}

#[derive(Clone, Debug)]
struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] = self.rank[a].saturating_add(1);
            }
        }
    }
}

/// Connected components of the graph on `0..n`. Each component is sorted;
/// components are ordered by their smallest member. Isolated nodes are
/// singleton components.
pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut sets = DisjointSet::new(n);
    for &(a, b) in edges {
        sets.union(a, b);
    }
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for node in 0..n {
        let root = sets.find(node);
        let idx = *slot.entry(root).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[idx].push(node);
    }
    out
}

/// One connected component at one filter level.
#[derive(Clone, Debug, PartialEq)]
pub struct Island {
    pub id: usize,
    pub level: usize,
    pub phi: f64,
    /// Entity ids, ascending.
    pub members: Vec<usize>,
    /// Island one level down that contains this one; `None` is the virtual
    /// root.
    pub parent: Option<usize>,
    /// Entity id of the member with the largest summed correlation to the
    /// rest of the island.
    pub characteristic: usize,
}

impl Island {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Singletons are kept in the tree but are not meant to be drawn.
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// All islands of a sweep, level by level.
#[derive(Clone, Debug, PartialEq)]
pub struct IslandTree {
    family: EntityKind,
    grid: FilterGrid,
    /// Entity ids of the full member set, ascending.
    members: Vec<usize>,
    names: HashMap<usize, String>,
    levels: Vec<f64>,
    islands: Vec<Island>,
    level_offsets: Vec<usize>,
}

impl IslandTree {
    pub fn family(&self) -> EntityKind {
        self.family
    }

    pub fn grid(&self) -> FilterGrid {
        self.grid
    }

    /// Members of the virtual root, i.e. every member of the matrix.
    pub fn root_members(&self) -> &[usize] {
        &self.members
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn islands(&self) -> &[Island] {
        &self.islands
    }

    pub fn islands_at(&self, level: usize) -> &[Island] {
        &self.islands[self.level_offsets[level]..self.level_offsets[level + 1]]
    }

    pub fn children(&self, island: usize) -> impl Iterator<Item = &Island> + '_ {
        let level = self.islands[island].level + 1;
        let range = if level < self.levels.len() {
            self.level_offsets[level]..self.level_offsets[level + 1]
        } else {
            0..0
        };
        self.islands[range]
            .iter()
            .filter(move |i| i.parent == Some(island))
    }

    pub fn name(&self, entity: usize) -> &str {
        self.names.get(&entity).map(String::as_str).unwrap_or("")
    }
}

/// Member with the largest row sum over the island, diagonal included.
/// `positions` must be ordered by entity id; ties go to the first.
fn characteristic_position(c: &CorrelationMatrix, positions: &[usize]) -> usize {
    let mut best = positions[0];
    let mut best_sum = f64::NEG_INFINITY;
    for &i in positions {
        let sum: f64 = positions.iter().map(|&j| c.get(i, j)).sum();
        if sum > best_sum {
            best = i;
            best_sum = sum;
        }
    }
    best
}

/// Entity id of the characteristic element of the island made of the given
/// entity ids. Ties go to the smallest id.
pub fn characteristic_element(c: &CorrelationMatrix, members: &[usize]) -> Result<usize> {
    let mut positions = members
        .iter()
        .map(|&m| {
            c.position(m).ok_or(Error::UnknownId {
                kind: c.family(),
                id: m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if positions.is_empty() {
        return Err(Error::InvalidConfig("island has no members".into()));
    }
    positions.sort_by_key(|&p| c.members()[p]);
    Ok(c.members()[characteristic_position(c, &positions)])
}

/// Number of grid levels the sweep visits: up to and including the first
/// level at which no link survives, and never past φ = 1.
fn level_count(c: &CorrelationMatrix, grid: &FilterGrid) -> usize {
    let max = c.max_off_diagonal();
    let mut t = 0;
    loop {
        let phi = grid.level(t);
        if phi >= 1.0 {
            return t.max(1);
        }
        if phi >= max {
            return t + 1;
        }
        t += 1;
    }
}

pub fn build_tree(c: &CorrelationMatrix, grid: &FilterGrid) -> IslandTree {
    let n = c.len();
    let ids = c.members();
    let count = level_count(c, grid);
    let levels: Vec<f64> = (0..count).map(|t| grid.level(t)).collect();

    // per level: islands as position lists, each ordered by entity id,
    // islands ordered by smallest entity id
    let partitions: Vec<Vec<Vec<usize>>> = levels
        .par_iter()
        .map(|&phi| {
            let edges = filter_edges(c, phi).expect("grid levels lie in [0, 1)");
            let mut parts = components(n, &edges);
            for part in &mut parts {
                part.sort_by_key(|&p| ids[p]);
            }
            parts.sort_by_key(|part| ids[part[0]]);
            parts
        })
        .collect();

    let mut islands = Vec::new();
    let mut level_offsets = vec![0];
    let mut owner_prev: Vec<usize> = Vec::new();
    for (level, parts) in partitions.into_iter().enumerate() {
        let mut owner = vec![0; n];
        for positions in parts {
            let id = islands.len();
            let parent = (level > 0).then(|| owner_prev[positions[0]]);
            for &p in &positions {
                owner[p] = id;
            }
            let characteristic = ids[characteristic_position(c, &positions)];
            islands.push(Island {
                id,
                level,
                phi: levels[level],
                members: positions.iter().map(|&p| ids[p]).collect(),
                parent,
                characteristic,
            });
        }
        level_offsets.push(islands.len());
        owner_prev = owner;
    }

    let mut members = ids.to_vec();
    members.sort_unstable();
    let names = ids
        .iter()
        .zip(c.names())
        .map(|(&id, name)| (id, name.clone()))
        .collect();

    IslandTree {
        family: c.family(),
        grid: *grid,
        members,
        names,
        levels,
        islands,
        level_offsets,
    }
}
