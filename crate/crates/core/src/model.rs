//! Tripartite user / item / tag network.
//!
//! A user who attaches `k` distinct tags to an item contributes `k` links of
//! weight exactly `1/k`, so that the weights of one user's description of
//! one item always sum to one. Weights are kept as exact rationals.

use std::collections::HashMap;

use num_rational::Ratio;

use crate::error::{EntityKind, Error, Result};

/// Exact link weight.
pub type Weight = Ratio<u32>;

/// Interns external names into dense ids, in first-seen order.
#[derive(Clone, Debug)]
pub struct EntityRegistry {
    kind: EntityKind,
    names: Vec<String>,
    indices: HashMap<String, usize>,
}

impl EntityRegistry {
    pub fn new(kind: EntityKind) -> Self {
        EntityRegistry {
            kind,
            names: Vec::new(),
            indices: HashMap::new(),
        }
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.indices.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    /// Like [`id`](Self::id) but reports unknown names as an error.
    pub fn resolve(&self, name: &str) -> Result<usize> {
        self.id(name).ok_or_else(|| Error::UnknownName {
            kind: self.kind,
            name: name.to_owned(),
        })
    }

    pub fn check(&self, id: usize) -> Result<()> {
        if id < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: self.kind,
                id,
            })
        }
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.indices.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.indices.insert(name.to_owned(), id);
        id
    }
}

/// How raw tag strings are turned into tag names.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TagNormalization {
    /// Trim surrounding whitespace and lowercase.
    #[default]
    TrimFold,
    /// Keep the string verbatim.
    Exact,
}

impl TagNormalization {
    pub fn apply(self, raw: &str) -> String {
        match self {
            TagNormalization::TrimFold => raw.trim().to_lowercase(),
            TagNormalization::Exact => raw.to_owned(),
        }
    }
}

/// One user's tag set for one item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggingEvent {
    pub user: String,
    pub item: String,
    pub tags: Vec<String>,
}

impl TaggingEvent {
    /// Builds an event, dropping repeated tags while keeping first-seen order.
    pub fn new<T, S>(user: impl Into<String>, item: impl Into<String>, tags: T) -> Self
    where
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for tag in tags {
            let tag = tag.into();
            if !out.contains(&tag) {
                out.push(tag);
            }
        }
        TaggingEvent {
            user: user.into(),
            item: item.into(),
            tags: out,
        }
    }
}

/// A single weighted user-item-tag link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub user: usize,
    pub item: usize,
    pub tag: usize,
    pub weight: Weight,
}

/// An owned (user, item) pair and the distinct tags the user gave the item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnedPair {
    pub user: usize,
    pub item: usize,
    /// Sorted, distinct tag ids. Never empty.
    pub tags: Vec<usize>,
}

impl OwnedPair {
    /// Weight carried by each of this pair's links.
    pub fn weight(&self) -> Weight {
        Ratio::new(1, self.tags.len() as u32)
    }

    pub fn weight_f64(&self) -> f64 {
        1.0 / self.tags.len() as f64
    }
}

/// Immutable tripartite network. Build it with [`NetworkBuilder`] or
/// [`build_network`].
#[derive(Clone, Debug)]
pub struct TripartiteNetwork {
    users: EntityRegistry,
    items: EntityRegistry,
    tags: EntityRegistry,
    /// Sorted by (user, item).
    pairs: Vec<OwnedPair>,
    user_offsets: Vec<usize>,
    item_pairs: Vec<Vec<usize>>,
    tag_pairs: Vec<Vec<usize>>,
}

impl TripartiteNetwork {
    pub fn users(&self) -> &EntityRegistry {
        &self.users
    }

    pub fn items(&self) -> &EntityRegistry {
        &self.items
    }

    pub fn tags(&self) -> &EntityRegistry {
        &self.tags
    }

    pub fn registry(&self, kind: EntityKind) -> &EntityRegistry {
        match kind {
            EntityKind::User => &self.users,
            EntityKind::Item => &self.items,
            EntityKind::Tag => &self.tags,
        }
    }

    pub fn count(&self, kind: EntityKind) -> usize {
        self.registry(kind).len()
    }

    pub fn pairs(&self) -> &[OwnedPair] {
        &self.pairs
    }

    /// Pairs owned by `user`, in item id order.
    pub fn pairs_of_user(&self, user: usize) -> &[OwnedPair] {
        if user + 1 >= self.user_offsets.len() {
            return &[];
        }
        &self.pairs[self.user_offsets[user]..self.user_offsets[user + 1]]
    }

    /// Pairs that own `item`, in user id order.
    pub fn pairs_of_item(&self, item: usize) -> impl Iterator<Item = &OwnedPair> + '_ {
        self.item_pairs
            .get(item)
            .into_iter()
            .flatten()
            .map(move |&p| &self.pairs[p])
    }

    /// Pairs whose tag set contains `tag`, in (user, item) order.
    pub fn pairs_of_tag(&self, tag: usize) -> impl Iterator<Item = &OwnedPair> + '_ {
        self.tag_pairs
            .get(tag)
            .into_iter()
            .flatten()
            .map(move |&p| &self.pairs[p])
    }

    pub fn link_count(&self) -> usize {
        self.pairs.iter().map(|p| p.tags.len()).sum()
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.pairs.iter().flat_map(|p| {
            let weight = p.weight();
            p.tags.iter().map(move |&tag| Link {
                user: p.user,
                item: p.item,
                tag,
                weight,
            })
        })
    }

    pub fn owns(&self, user: usize, item: usize) -> bool {
        self.find_pair(user, item).is_some()
    }

    fn find_pair(&self, user: usize, item: usize) -> Option<&OwnedPair> {
        let pairs = self.pairs_of_user(user);
        pairs
            .binary_search_by_key(&item, |p| p.item)
            .ok()
            .map(|i| &pairs[i])
    }

    /// Weight of the (user, item, tag) link; zero when there is no link.
    pub fn weight(&self, user: usize, item: usize, tag: usize) -> Weight {
        match self.find_pair(user, item) {
            Some(pair) if pair.tags.binary_search(&tag).is_ok() => pair.weight(),
            _ => Ratio::from_integer(0),
        }
    }
}

/// Single-writer accumulator for tagging events.
#[derive(Debug)]
pub struct NetworkBuilder {
    normalization: TagNormalization,
    users: EntityRegistry,
    items: EntityRegistry,
    tags: EntityRegistry,
    pairs: HashMap<(usize, usize), Vec<usize>>,
}

impl NetworkBuilder {
    pub fn new(normalization: TagNormalization) -> Self {
        NetworkBuilder {
            normalization,
            users: EntityRegistry::new(EntityKind::User),
            items: EntityRegistry::new(EntityKind::Item),
            tags: EntityRegistry::new(EntityKind::Tag),
            pairs: HashMap::new(),
        }
    }

    /// Adds one event. Repeated (user, item) events merge by tag-set union.
    /// An event whose tags all normalize to the empty string is rejected and
    /// leaves the builder untouched.
    pub fn push(&mut self, event: &TaggingEvent) -> Result<()> {
        let mut tags: Vec<String> = Vec::with_capacity(event.tags.len());
        for raw in &event.tags {
            let tag = self.normalization.apply(raw);
            if !tag.is_empty() && !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        if tags.is_empty() {
            return Err(Error::EmptyTagSet {
                user: event.user.clone(),
                item: event.item.clone(),
            });
        }
        let user = self.users.intern(&event.user);
        let item = self.items.intern(&event.item);
        let set = self.pairs.entry((user, item)).or_default();
        for tag in &tags {
            let id = self.tags.intern(tag);
            if let Err(pos) = set.binary_search(&id) {
                set.insert(pos, id);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> TripartiteNetwork {
        let mut pairs: Vec<OwnedPair> = self
            .pairs
            .into_iter()
            .map(|((user, item), tags)| OwnedPair { user, item, tags })
            .collect();
        pairs.sort_unstable_by_key(|p| (p.user, p.item));

        let mut user_offsets = vec![0; self.users.len() + 1];
        for p in &pairs {
            user_offsets[p.user + 1] += 1;
        }
        for u in 0..self.users.len() {
            user_offsets[u + 1] += user_offsets[u];
        }
        let mut item_pairs = vec![Vec::new(); self.items.len()];
        let mut tag_pairs = vec![Vec::new(); self.tags.len()];
        for (idx, p) in pairs.iter().enumerate() {
            item_pairs[p.item].push(idx);
            for &t in &p.tags {
                tag_pairs[t].push(idx);
            }
        }

        TripartiteNetwork {
            users: self.users,
            items: self.items,
            tags: self.tags,
            pairs,
            user_offsets,
            item_pairs,
            tag_pairs,
        }
    }
}

/// Network plus the events that were rejected while building it.
#[derive(Debug)]
pub struct BuildOutcome {
    pub network: TripartiteNetwork,
    pub rejected: Vec<Error>,
}

/// Builds a network, collecting rejected events instead of stopping.
pub fn build_network<'a, I>(events: I, normalization: TagNormalization) -> BuildOutcome
where
    I: IntoIterator<Item = &'a TaggingEvent>,
{
    let mut builder = NetworkBuilder::new(normalization);
    let mut rejected = Vec::new();
    for event in events {
        if let Err(e) = builder.push(event) {
            rejected.push(e);
        }
    }
    BuildOutcome {
        network: builder.finish(),
        rejected,
    }
}

/// Ownership and tag-usage summary of a network.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegreeStats {
    pub users: usize,
    pub items: usize,
    pub tags: usize,
    pub links: usize,
    pub ownership_pairs: usize,
    pub items_per_user: f64,
    pub users_per_item: f64,
    /// Number of links touching each tag, indexed by tag id.
    pub tag_usage: Vec<usize>,
}

pub fn degree_stats(net: &TripartiteNetwork) -> DegreeStats {
    let pairs = net.pairs.len();
    let mean = |n: usize| if n == 0 { 0.0 } else { pairs as f64 / n as f64 };
    DegreeStats {
        users: net.users.len(),
        items: net.items.len(),
        tags: net.tags.len(),
        links: net.link_count(),
        ownership_pairs: pairs,
        items_per_user: mean(net.users.len()),
        users_per_item: mean(net.items.len()),
        tag_usage: net.tag_pairs.iter().map(Vec::len).collect(),
    }
}
