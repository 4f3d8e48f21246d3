//! Bipartite signature vectors and unipartite cosine-correlation matrices.
//!
//! Projections sum over the eliminated node kind: a user's item signature
//! sums over tags, an item's tag signature sums over users. Three-way
//! correlations are not represented.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{EntityKind, Error, Result};
use crate::matrix::SymmetricStorage;
use crate::model::TripartiteNetwork;

/// Families above this size get sparse correlation storage.
pub const DENSE_LIMIT: usize = 4096;

/// Which family is correlated, and through which other family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum View {
    UsersViaItems,
    ItemsViaUsers,
    ItemsViaTags,
    TagsViaItems,
}

impl View {
    pub const ALL: [View; 4] = [
        View::UsersViaItems,
        View::ItemsViaUsers,
        View::ItemsViaTags,
        View::TagsViaItems,
    ];

    pub fn family(self) -> EntityKind {
        match self {
            View::UsersViaItems => EntityKind::User,
            View::ItemsViaUsers | View::ItemsViaTags => EntityKind::Item,
            View::TagsViaItems => EntityKind::Tag,
        }
    }

    pub fn axis(self) -> EntityKind {
        match self {
            View::UsersViaItems | View::TagsViaItems => EntityKind::Item,
            View::ItemsViaUsers => EntityKind::User,
            View::ItemsViaTags => EntityKind::Tag,
        }
    }

    /// The usual view for a family.
    pub fn default_for(family: EntityKind) -> View {
        match family {
            EntityKind::User => View::UsersViaItems,
            EntityKind::Item => View::ItemsViaUsers,
            EntityKind::Tag => View::TagsViaItems,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            View::UsersViaItems => "users-via-items",
            View::ItemsViaUsers => "items-via-users",
            View::ItemsViaTags => "items-via-tags",
            View::TagsViaItems => "tags-via-items",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        View::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown view '{s}'"))
    }
}

/// Coordinates of item-tag signatures: summed link weights, or plain
/// presence of at least one attribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Attribution {
    #[default]
    Summed,
    Binary,
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    pub attribution: Attribution,
    /// Member count above which the matrix is stored sparsely.
    pub dense_limit: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            attribution: Attribution::Summed,
            dense_limit: DENSE_LIMIT,
        }
    }
}

/// Sparse nonnegative profile of one entity over another family.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureVector {
    pub owner_kind: EntityKind,
    pub owner: usize,
    pub axis: EntityKind,
    /// Sorted by coordinate; all values strictly positive.
    entries: Vec<(usize, f64)>,
}

impl SignatureVector {
    /// Builds a vector from arbitrary entries, dropping zeros and summing
    /// repeated coordinates.
    pub fn from_entries(
        owner_kind: EntityKind,
        owner: usize,
        axis: EntityKind,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Self {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v > 0.0);
        SignatureVector {
            owner_kind,
            owner,
            axis,
            entries: merged,
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, coord: usize) -> f64 {
        match self.entries.binary_search_by_key(&coord, |&(c, _)| c) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SignatureVector {
        SignatureVector::from_entries(
            self.owner_kind,
            self.owner,
            self.axis,
            self.entries.iter().map(|&(c, v)| (c, v * factor)),
        )
    }

    fn dot(&self, other: &SignatureVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (ca, va) = self.entries[i];
            let (cb, vb) = other.entries[j];
            match ca.cmp(&cb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

fn ratio_to_f64(r: Ratio<u32>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Binary ownership vector of a user over items.
pub fn user_item_signature(net: &TripartiteNetwork, user: usize) -> Result<SignatureVector> {
    net.users().check(user)?;
    let entries = net.pairs_of_user(user).iter().map(|p| {
        let summed: Ratio<u32> = p.tags.iter().map(|_| p.weight()).sum();
        (p.item, ratio_to_f64(summed))
    });
    Ok(SignatureVector::from_entries(
        EntityKind::User,
        user,
        EntityKind::Item,
        entries,
    ))
}

/// Binary audience vector of an item over users.
pub fn item_user_signature(net: &TripartiteNetwork, item: usize) -> Result<SignatureVector> {
    net.items().check(item)?;
    let entries = net.pairs_of_item(item).map(|p| {
        let summed: Ratio<u32> = p.tags.iter().map(|_| p.weight()).sum();
        (p.user, ratio_to_f64(summed))
    });
    Ok(SignatureVector::from_entries(
        EntityKind::Item,
        item,
        EntityKind::User,
        entries,
    ))
}

fn attribution_value(attribution: Attribution, weight: f64) -> f64 {
    match attribution {
        Attribution::Summed => weight,
        Attribution::Binary => 1.0,
    }
}

/// Tag profile of an item, summed over users.
pub fn item_tag_signature(
    net: &TripartiteNetwork,
    item: usize,
    attribution: Attribution,
) -> Result<SignatureVector> {
    net.items().check(item)?;
    let mut entries = Vec::new();
    for p in net.pairs_of_item(item) {
        let w = p.weight_f64();
        entries.extend(p.tags.iter().map(|&t| (t, w)));
    }
    let v = SignatureVector::from_entries(EntityKind::Item, item, EntityKind::Tag, entries);
    Ok(binarize(v, attribution))
}

/// Item profile of a tag, summed over users. Transpose of
/// [`item_tag_signature`].
pub fn tag_item_signature(
    net: &TripartiteNetwork,
    tag: usize,
    attribution: Attribution,
) -> Result<SignatureVector> {
    net.tags().check(tag)?;
    let entries = net.pairs_of_tag(tag).map(|p| (p.item, p.weight_f64()));
    let v = SignatureVector::from_entries(EntityKind::Tag, tag, EntityKind::Item, entries);
    Ok(binarize(v, attribution))
}

fn binarize(mut v: SignatureVector, attribution: Attribution) -> SignatureVector {
    for e in &mut v.entries {
        e.1 = attribution_value(attribution, e.1);
    }
    v
}

/// Signature of `id` (a member of `view.family()`) under `view`.
pub fn signature(
    net: &TripartiteNetwork,
    view: View,
    id: usize,
    attribution: Attribution,
) -> Result<SignatureVector> {
    match view {
        View::UsersViaItems => user_item_signature(net, id),
        View::ItemsViaUsers => item_user_signature(net, id),
        View::ItemsViaTags => item_tag_signature(net, id, attribution),
        View::TagsViaItems => tag_item_signature(net, id, attribution),
    }
}

fn cosine_from_parts(dot: f64, norm_u: f64, norm_v: f64) -> f64 {
    (dot / (norm_u * norm_v)).clamp(0.0, 1.0)
}

/// Cosine of the angle between two signatures. Empty vectors have cosine 0
/// against everything, themselves included.
pub fn cosine(u: &SignatureVector, v: &SignatureVector) -> Result<f64> {
    if u.axis != v.axis {
        return Err(Error::AxisMismatch {
            left: u.axis,
            right: v.axis,
        });
    }
    if u.is_empty() || v.is_empty() {
        return Ok(0.0);
    }
    Ok(cosine_from_parts(u.dot(v), u.norm(), v.norm()))
}

/// Symmetric cosine-similarity matrix over one entity family.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    family: EntityKind,
    view: Option<View>,
    members: Vec<usize>,
    names: Vec<String>,
    /// Positions whose signature is empty.
    empty: Vec<usize>,
    storage: SymmetricStorage,
}

impl CorrelationMatrix {
    /// Wraps a caller-supplied dense matrix (row-major). Members get ids
    /// `0..n` in row order.
    pub fn from_dense(family: EntityKind, names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if values.len() != n * n {
            return Err(Error::InvalidConfig(format!(
                "expected {} values for {n} members, got {}",
                n * n,
                values.len()
            )));
        }
        for a in 0..n {
            for b in 0..n {
                let v = values[a * n + b];
                if !(0.0..=1.0).contains(&v) || v != values[b * n + a] {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({a}, {b}) = {v} breaks symmetry or [0, 1] bounds"
                    )));
                }
            }
        }
        let empty = (0..n).filter(|&a| values[a * n + a] == 0.0).collect();
        Ok(CorrelationMatrix {
            family,
            view: None,
            members: (0..n).collect(),
            names,
            empty,
            storage: SymmetricStorage::Dense { n, values },
        })
    }

    pub fn family(&self) -> EntityKind {
        self.family
    }

    pub fn view(&self) -> Option<View> {
        self.view
    }

    /// Entity ids, in matrix row order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        self.storage.is_dense()
    }

    /// Row positions of members with an empty signature; their diagonal is 0.
    pub fn empty_members(&self) -> &[usize] {
        &self.empty
    }

    pub fn position(&self, entity: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == entity)
    }

    /// Entry at row positions `a`, `b`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.storage.get(a, b)
    }

    /// Off-diagonal entries `(a, b, value)` with `a < b`. Sparse matrices
    /// skip zero entries.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.storage.upper_entries()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.upper_entries().map(|(_, _, v)| v).fold(0.0, f64::max)
    }

    pub(crate) fn storage(&self) -> &SymmetricStorage {
        &self.storage
    }
}

/// Cosine-correlation matrix of `members` (default: the whole family)
/// under `view`.
pub fn correlation_matrix(
    net: &TripartiteNetwork,
    view: View,
    members: Option<&[usize]>,
    options: &ProjectionOptions,
) -> Result<CorrelationMatrix> {
    let family = view.family();
    let members: Vec<usize> = match members {
        Some(ids) => ids.to_vec(),
        None => (0..net.count(family)).collect(),
    };
    let sigs = members
        .iter()
        .map(|&id| signature(net, view, id, options.attribution))
        .collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = sigs.iter().map(SignatureVector::norm).collect();
    let n = members.len();

    // coordinate -> (row, value), rows ascending
    let mut postings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.count(view.axis())];
    for (row, sig) in sigs.iter().enumerate() {
        for &(c, v) in sig.entries() {
            postings[c].push((row, v));
        }
    }

    // Row a holds cosines against b > a. Each dot product accumulates in
    // ascending coordinate order, as `cosine` does.
    let upper: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; n], Vec::<usize>::new()),
            |(acc, touched), a| {
                for &(c, va) in sigs[a].entries() {
                    for &(b, vb) in &postings[c] {
                        if b <= a {
                            continue;
                        }
                        if acc[b] == 0.0 {
                            touched.push(b);
                        }
                        acc[b] += va * vb;
                    }
                }
                touched.sort_unstable();
                let row = touched
                    .iter()
                    .map(|&b| (b, cosine_from_parts(acc[b], norms[a], norms[b])))
                    .collect();
                for &b in touched.iter() {
                    acc[b] = 0.0;
                }
                touched.clear();
                row
            },
        )
        .collect();

    let empty: Vec<usize> = (0..n).filter(|&a| sigs[a].is_empty()).collect();
    let diagonal: Vec<f64> = sigs
        .iter()
        .map(|s| if s.is_empty() { 0.0 } else { 1.0 })
        .collect();

    let storage = if n <= options.dense_limit {
        let mut values = vec![0.0; n * n];
        for a in 0..n {
            values[a * n + a] = diagonal[a];
        }
        for (a, row) in upper.iter().enumerate() {
            for &(b, v) in row {
                values[a * n + b] = v;
                values[b * n + a] = v;
            }
        }
        SymmetricStorage::Dense { n, values }
    } else {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (a, row) in upper.iter().enumerate() {
            for &(b, v) in row {
                if v > 0.0 {
                    rows[a].push((b, v));
                    rows[b].push((a, v));
                }
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(b, _)| b);
        }
        SymmetricStorage::Sparse {
            rows,
            diagonal,
            fill: 0.0,
        }
    };

    let registry = net.registry(family);
    let names = members
        .iter()
        .map(|&id| registry.name(id).unwrap_or_default().to_owned())
        .collect();

    Ok(CorrelationMatrix {
        family,
        view: Some(view),
        members,
        names,
        empty,
        storage,
    })
}

/// Usage of every entity of `kind`: link count for tags, audience size for
/// items, library size for users.
pub fn usage(net: &TripartiteNetwork, kind: EntityKind) -> Vec<usize> {
    match kind {
        EntityKind::Tag => (0..net.tags().len())
            .map(|t| net.pairs_of_tag(t).count())
            .collect(),
        EntityKind::Item => (0..net.items().len())
            .map(|i| net.pairs_of_item(i).count())
            .collect(),
        EntityKind::User => (0..net.users().len())
            .map(|u| net.pairs_of_user(u).len())
            .collect(),
    }
}

/// Ids of the `n` most used entities, most used first; ties go to the
/// earlier-seen entity.
pub fn top_n(net: &TripartiteNetwork, kind: EntityKind, n: usize) -> Vec<usize> {
    let usage = usage(net, kind);
    let mut ids: Vec<usize> = (0..usage.len()).collect();
    ids.sort_by_key(|&id| (std::cmp::Reverse(usage[id]), id));
    ids.truncate(n);
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_network, TagNormalization, TaggingEvent};

    fn net(events: &[TaggingEvent]) -> TripartiteNetwork {
        build_network(events, TagNormalization::Exact).network
    }

    fn vector(entries: &[(usize, f64)]) -> SignatureVector {
        SignatureVector::from_entries(
            EntityKind::User,
            0,
            EntityKind::Item,
            entries.iter().copied(),
        )
    }

    #[test]
    fn user_signature_is_binary() {
        let n = net(&[
            TaggingEvent::new("mu", "i1", ["a"]),
            TaggingEvent::new("mu", "i2", ["a", "b"]),
            TaggingEvent::new("mu", "i3", ["a", "b", "c"]),
            TaggingEvent::new("nu", "i1", ["a"]),
        ]);
        let s = user_item_signature(&n, 0).unwrap();
        assert_eq!(s.entries(), &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert!(user_item_signature(&n, 9).is_err());
    }

    #[test]
    fn item_tag_signatures() {
        let n = net(&[
            TaggingEvent::new("u1", "x", ["I1", "I2"]),
            TaggingEvent::new("u1", "y", ["I1"]),
            TaggingEvent::new("u2", "y", ["I1"]),
            TaggingEvent::new("u3", "y", ["I1"]),
        ]);
        let x = item_tag_signature(&n, 0, Attribution::Summed).unwrap();
        assert_eq!(x.entries(), &[(0, 0.5), (1, 0.5)]);
        let y = item_tag_signature(&n, 1, Attribution::Summed).unwrap();
        assert_eq!(y.entries(), &[(0, 3.0)]);
        let yb = item_tag_signature(&n, 1, Attribution::Binary).unwrap();
        assert_eq!(yb.entries(), &[(0, 1.0)]);

        let t = tag_item_signature(&n, 0, Attribution::Summed).unwrap();
        assert_eq!(t.entries(), &[(0, 0.5), (1, 3.0)]);
    }

    #[test]
    fn cosine_examples() {
        let u = vector(&[(0, 1.0), (1, 1.0)]);
        let v = vector(&[(1, 1.0), (2, 1.0)]);
        assert!((cosine(&u, &v).unwrap() - 0.5).abs() < 1e-12);
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let w = vector(&[(5, 2.0)]);
        assert_eq!(cosine(&u, &w).unwrap(), 0.0);
        let empty = vector(&[]);
        assert_eq!(cosine(&empty, &empty).unwrap(), 0.0);
    }

    #[test]
    fn cosine_axis_mismatch() {
        let u = vector(&[(0, 1.0)]);
        let t = SignatureVector::from_entries(EntityKind::Item, 0, EntityKind::Tag, [(0, 1.0)]);
        assert!(matches!(cosine(&u, &t), Err(Error::AxisMismatch { .. })));
    }

    #[test]
    fn identical_libraries_correlate_fully() {
        let n = net(&[
            TaggingEvent::new("a", "x", ["t"]),
            TaggingEvent::new("a", "y", ["t"]),
            TaggingEvent::new("b", "x", ["t", "s"]),
            TaggingEvent::new("b", "y", ["t"]),
        ]);
        let c = correlation_matrix(&n, View::UsersViaItems, None, &Default::default()).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(c.get(0, 0), 1.0);
    }

    #[test]
    fn disjoint_tags_give_identity() {
        let n = net(&[
            TaggingEvent::new("u", "x", ["a"]),
            TaggingEvent::new("u", "y", ["b"]),
            TaggingEvent::new("u", "z", ["c"]),
        ]);
        let c = correlation_matrix(&n, View::TagsViaItems, None, &Default::default()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(c.get(a, b), if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn sparse_storage_matches_dense() {
        let n = net(&[
            TaggingEvent::new("u1", "x", ["a", "b"]),
            TaggingEvent::new("u2", "x", ["b", "c"]),
            TaggingEvent::new("u2", "y", ["a"]),
            TaggingEvent::new("u3", "z", ["d"]),
        ]);
        let dense = correlation_matrix(&n, View::TagsViaItems, None, &Default::default()).unwrap();
        let sparse = correlation_matrix(
            &n,
            View::TagsViaItems,
            None,
            &ProjectionOptions {
                dense_limit: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(dense.is_dense());
        assert!(!sparse.is_dense());
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(dense.get(a, b), sparse.get(a, b));
            }
        }
    }

    #[test]
    fn empty_signature_is_flagged() {
        let m = CorrelationMatrix::from_dense(
            EntityKind::Tag,
            vec!["a".into(), "b".into()],
            vec![1.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(m.empty_members(), &[1]);
    }

    #[test]
    fn from_dense_rejects_asymmetry() {
        let r = CorrelationMatrix::from_dense(
            EntityKind::Tag,
            vec!["a".into(), "b".into()],
            vec![1.0, 0.3, 0.2, 1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn top_n_ties_and_overflow() {
        // usage: t0=5, t1=3, t2=3, t3=1
        let mut events = Vec::new();
        for i in 0..5 {
            let mut tags = vec!["t0"];
            if i < 3 {
                tags.push("t1");
                tags.push("t2");
            }
            if i == 0 {
                tags.push("t3");
            }
            events.push(TaggingEvent::new("u", format!("i{i}"), tags));
        }
        let n = net(&events);
        assert_eq!(usage(&n, EntityKind::Tag), vec![5, 3, 3, 1]);
        assert_eq!(top_n(&n, EntityKind::Tag, 2), vec![0, 1]);
        assert_eq!(top_n(&n, EntityKind::Tag, 10).len(), 4);
        assert_eq!(top_n(&n, EntityKind::User, 3), vec![0]);
    }

    #[test]
    fn view_round_trips_through_str() {
        for v in View::ALL {
            assert_eq!(v.as_str().parse::<View>().unwrap(), v);
        }
        assert!("tags-via-users".parse::<View>().is_err());
    }
}
