//! Planted-community corpora used as ground truth for island recovery.
//!
//! Users, items and tags are split into `communities` equal blocks. Each
//! user owns items of its own block; each (user, item) pair gets 1 to 3
//! distinct tags, each tag slot drawn from the user's block or from a
//! random foreign block in proportion `p_intra : p_inter`.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TaggingEvent;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedConfig {
    pub communities: usize,
    pub tags_per_community: usize,
    pub users_per_community: usize,
    pub items_per_community: usize,
    /// Library size of every user, capped at `items_per_community`.
    pub items_per_user: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            communities: 3,
            tags_per_community: 20,
            users_per_community: 30,
            items_per_community: 40,
            items_per_user: 10,
            p_intra: 0.9,
            p_inter: 0.05,
            seed: 1,
        }
    }
}

impl PlantedConfig {
    /// Parses `key = value` lines; missing keys keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let config: PlantedConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("communities", self.communities),
            ("tags_per_community", self.tags_per_community),
            ("users_per_community", self.users_per_community),
            ("items_per_community", self.items_per_community),
            ("items_per_user", self.items_per_user),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
        }
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        if self.p_intra + self.p_inter <= 0.0 {
            return Err(Error::InvalidConfig("p_intra and p_inter are both zero".into()));
        }
        Ok(())
    }

    pub fn tag_count(&self) -> usize {
        self.communities * self.tags_per_community
    }
}

pub fn user_name(id: usize) -> String {
    format!("u{id}")
}

pub fn item_name(id: usize) -> String {
    format!("i{id}")
}

pub fn tag_name(community: usize, index: usize) -> String {
    format!("c{community}t{index}")
}

/// A generated corpus and its planted structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedCorpus {
    pub events: Vec<TaggingEvent>,
    /// Planted community of every generated tag, by tag name.
    pub truth: BTreeMap<String, usize>,
    /// Number of (user, item, tag) attributions.
    pub attributions: usize,
}

struct TagDraw<'a> {
    config: &'a PlantedConfig,
    rng: ChaCha8Rng,
}

impl TagDraw<'_> {
    fn community_for(&mut self, home: usize) -> usize {
        let c = self.config;
        let foreign = self.rng.random::<f64>() * (c.p_intra + c.p_inter) >= c.p_intra;
        if !foreign || c.communities == 1 {
            return home;
        }
        let other = self.rng.random_range(0..c.communities - 1);
        if other >= home {
            other + 1
        } else {
            other
        }
    }

    fn tags_for(&mut self, home: usize) -> Vec<String> {
        let c = self.config;
        let k = self.rng.random_range(1..=3usize).min(c.tags_per_community);
        let mut tags: Vec<(usize, usize)> = Vec::with_capacity(k);
        while tags.len() < k {
            let community = self.community_for(home);
            let tag = (community, self.rng.random_range(0..c.tags_per_community));
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        tags.into_iter().map(|(c, t)| tag_name(c, t)).collect()
    }
}

/// Generates a corpus; a pure function of `config`, seed included.
pub fn generate(config: &PlantedConfig) -> Result<PlantedCorpus> {
    config.validate()?;
    let mut draw = TagDraw {
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    let upc = config.users_per_community;
    let ipc = config.items_per_community;
    let library = config.items_per_user.min(ipc);

    let mut events = Vec::new();
    let mut owned = vec![false; config.communities * ipc];
    for home in 0..config.communities {
        for u in 0..upc {
            let user = home * upc + u;
            let mut picks = index::sample(&mut draw.rng, ipc, library).into_vec();
            picks.sort_unstable();
            for i in picks {
                let item = home * ipc + i;
                owned[item] = true;
                let tags = draw.tags_for(home);
                events.push(TaggingEvent::new(user_name(user), item_name(item), tags));
            }
        }
    }
    for (item, _) in owned.iter().enumerate().filter(|(_, o)| !**o) {
        let home = item / ipc;
        let user = home * upc + draw.rng.random_range(0..upc);
        let tags = draw.tags_for(home);
        events.push(TaggingEvent::new(user_name(user), item_name(item), tags));
    }

    let mut truth = BTreeMap::new();
    for e in &events {
        for t in &e.tags {
            let community = t[1..t.find('t').expect("generated tag name")]
                .parse()
                .expect("generated tag name");
            truth.insert(t.clone(), community);
        }
    }
    let attributions = events.iter().map(|e| e.tags.len()).sum();
    Ok(PlantedCorpus {
        events,
        truth,
        attributions,
    })
}

/// Rand-style agreement between two labelings of the same elements: the
/// fraction of element pairs on which both labelings agree about being in
/// the same group. 1 when there are fewer than two elements.
pub fn pair_counting_agreement(left: &[usize], right: &[usize]) -> f64 {
    assert_eq!(left.len(), right.len(), "labelings must cover the same elements");
    let n = left.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            if (left[a] == left[b]) == (right[a] == right[b]) {
                agree += 1;
            }
        }
    }
    agree as f64 / (n * (n - 1) / 2) as f64
}
