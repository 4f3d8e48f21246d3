//! Tag spectra and the measures built on them: Shannon entropy, sine-metric
//! diversity, normalized pairwise distance, and per-island activity ratios.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{EntityKind, Error, Result};
use crate::matrix::SymmetricStorage;
use crate::model::TripartiteNetwork;
use crate::percolation::IslandTree;
use crate::projection::CorrelationMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumOwner {
    User(usize),
    Sample,
}

/// What one (user, item, tag) attribution adds to τ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TauCounting {
    /// One per attribution.
    #[default]
    Attributions,
    /// The fractional link weight `1/k`.
    Weighted,
}

/// Tag usage counts τ of one user or of the whole sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TagSpectrum {
    owner: SpectrumOwner,
    counts: BTreeMap<usize, f64>,
    total: f64,
}

impl TagSpectrum {
    /// Builds a spectrum from explicit counts; zero counts are dropped.
    /// Panics on negative counts.
    pub fn from_counts(owner: SpectrumOwner, counts: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (tag, c) in counts {
            assert!(c >= 0.0, "tag counts must be nonnegative");
            if c > 0.0 {
                *map.entry(tag).or_insert(0.0) += c;
            }
        }
        let total = map.values().sum();
        TagSpectrum {
            owner,
            counts: map,
            total,
        }
    }

    pub fn owner(&self) -> SpectrumOwner {
        self.owner
    }

    pub fn counts(&self) -> &BTreeMap<usize, f64> {
        &self.counts
    }

    pub fn get(&self, tag: usize) -> f64 {
        self.counts.get(&tag).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> TagSpectrum {
        TagSpectrum::from_counts(self.owner, self.counts.iter().map(|(&t, &c)| (t, c * factor)))
    }
}

pub fn tag_spectrum(
    net: &TripartiteNetwork,
    owner: SpectrumOwner,
    counting: TauCounting,
) -> Result<TagSpectrum> {
    let pairs = match owner {
        SpectrumOwner::User(u) => {
            net.users().check(u)?;
            net.pairs_of_user(u)
        }
        SpectrumOwner::Sample => net.pairs(),
    };
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for p in pairs {
        let amount = match counting {
            TauCounting::Attributions => 1.0,
            TauCounting::Weighted => p.weight_f64(),
        };
        for &t in &p.tags {
            *counts.entry(t).or_insert(0.0) += amount;
        }
    }
    Ok(TagSpectrum::from_counts(owner, counts))
}

/// Shannon entropy (natural log) of the spectrum's tag distribution.
pub fn entropy(spec: &TagSpectrum) -> Result<f64> {
    if spec.is_empty() || spec.total <= 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let h: f64 = spec
        .counts
        .values()
        .map(|&c| {
            let p = c / spec.total;
            -p * p.ln()
        })
        .sum();
    Ok(h.max(0.0))
}

/// `S = sqrt(1 - C²)`, elementwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SineMatrix {
    members: Vec<usize>,
    names: Vec<String>,
    positions: HashMap<usize, usize>,
    storage: SymmetricStorage,
}

fn sine(c: f64) -> f64 {
    (1.0 - c * c).max(0.0).sqrt()
}

pub fn sine_matrix(c: &CorrelationMatrix) -> SineMatrix {
    SineMatrix {
        members: c.members().to_vec(),
        names: c.names().to_vec(),
        positions: c
            .members()
            .iter()
            .enumerate()
            .map(|(p, &id)| (id, p))
            .collect(),
        storage: c.storage().map(sine),
    }
}

impl SineMatrix {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Entry at row positions `a`, `b`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.storage.get(a, b)
    }

    pub fn position(&self, tag: usize) -> Option<usize> {
        self.positions.get(&tag).copied()
    }
}

/// Unnormalized cross sum `Σ_IJ S_IJ τ1_I τ2_J`.
///
/// Each ordered pair contributes `S_IJ (τ1_I τ2_J + τ1_J τ2_I) / 2`, which
/// has the same total (S is symmetric) and is bit-for-bit symmetric in the
/// two spectra.
pub fn cross_sum(spec1: &TagSpectrum, spec2: &TagSpectrum, s: &SineMatrix) -> Result<f64> {
    let support: BTreeSet<usize> = spec1.counts.keys().chain(spec2.counts.keys()).copied().collect();
    let missing: Vec<String> = support
        .iter()
        .filter(|t| s.position(**t).is_none())
        .map(|t| format!("#{t}"))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTags(missing));
    }
    let rows: Vec<(usize, f64, f64)> = support
        .iter()
        .map(|&t| (s.positions[&t], spec1.get(t), spec2.get(t)))
        .collect();
    let mut acc = 0.0;
    for &(pi, a_i, b_i) in &rows {
        for &(pj, a_j, b_j) in &rows {
            acc += s.get(pi, pj) * (a_i * b_j + a_j * b_i) / 2.0;
        }
    }
    Ok(acc)
}

/// `d = Σ_IJ S_IJ τ_I τ_J` over ordered pairs (twice the unordered sum).
pub fn diversity(spec: &TagSpectrum, s: &SineMatrix) -> Result<f64> {
    cross_sum(spec, spec, s)
}

/// Cross sum normalized by `sqrt(d1 d2)`; undefined when either diversity
/// is zero.
pub fn pairwise_distance(spec1: &TagSpectrum, spec2: &TagSpectrum, s: &SineMatrix) -> Result<f64> {
    let d1 = diversity(spec1, s)?;
    if d1 <= 0.0 {
        return Err(Error::UndefinedDistance("first"));
    }
    let d2 = diversity(spec2, s)?;
    if d2 <= 0.0 {
        return Err(Error::UndefinedDistance("second"));
    }
    Ok(cross_sum(spec1, spec2, s)? / (d1 * d2).sqrt())
}

/// 8-bit RGB color.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const GREEN: Rgb = Rgb(0, 200, 0);
    pub const BLUE: Rgb = Rgb(0, 0, 220);
    pub const GRAY: Rgb = Rgb(128, 128, 128);
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// Green for under-represented islands, blue for over-represented ones.
/// `log2(r)` is clamped to [-2, 2]; undefined ratios are gray.
pub fn activity_color(ratio: Option<f64>) -> Rgb {
    let Some(r) = ratio.filter(|r| *r >= 0.0) else {
        return Rgb::GRAY;
    };
    let t = (r.log2().clamp(-2.0, 2.0) + 2.0) / 4.0;
    let mix = |a: u8, b: u8| (a as f64 * (1.0 - t) + b as f64 * t).round() as u8;
    Rgb(
        mix(Rgb::GREEN.0, Rgb::BLUE.0),
        mix(Rgb::GREEN.1, Rgb::BLUE.1),
        mix(Rgb::GREEN.2, Rgb::BLUE.2),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivityRecord {
    pub island: usize,
    pub p_sample: f64,
    pub p_user: f64,
    /// `p_user / p_sample`; `None` when the sample never uses the island.
    pub ratio: Option<f64>,
    pub color: Rgb,
}

/// One activity record per island of a tag tree, in island id order.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivityReport {
    pub records: Vec<ActivityRecord>,
}

impl ActivityReport {
    /// Fails unless the report has exactly one record per island of `tree`.
    pub fn check_matches(&self, tree: &IslandTree) -> Result<()> {
        if self.records.len() != tree.islands().len() {
            return Err(Error::TreeMismatch(format!(
                "{} records for {} islands",
                self.records.len(),
                tree.islands().len()
            )));
        }
        if let Some(r) = self
            .records
            .iter()
            .zip(tree.islands())
            .find(|(r, i)| r.island != i.id)
        {
            return Err(Error::TreeMismatch(format!("unexpected island id {}", r.0.island)));
        }
        Ok(())
    }
}

/// Activity of one user on every island of a tag tree. Probabilities are
/// taken against the spectra totals over all tags.
pub fn island_activity(
    tree: &IslandTree,
    user: &TagSpectrum,
    sample: &TagSpectrum,
) -> Result<ActivityReport> {
    if tree.family() != EntityKind::Tag {
        return Err(Error::InvalidConfig(format!(
            "activity needs a tag tree, got a {} tree",
            tree.family()
        )));
    }
    if user.is_empty() || user.total <= 0.0 || sample.total <= 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let records = tree
        .islands()
        .iter()
        .map(|island| {
            let p_sample = island.members.iter().map(|&t| sample.get(t)).sum::<f64>() / sample.total;
            let p_user = island.members.iter().map(|&t| user.get(t)).sum::<f64>() / user.total;
            let ratio = (p_sample > 0.0).then(|| p_user / p_sample);
            ActivityRecord {
                island: island.id,
                p_sample,
                p_user,
                ratio,
                color: activity_color(ratio),
            }
        })
        .collect();
    Ok(ActivityReport { records })
}
