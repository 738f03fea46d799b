use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::AttributedNetwork;
use crate::numerics::Rng;

/// Outlier seeding parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedingPlan {
    /// Planted outliers as a fraction of the original node count.
    pub fraction: f64,
    /// Relative half-width of the degree band around a class's mean degree.
    pub degree_band: f64,
    pub seed: u64,
}

impl Default for SeedingPlan {
    fn default() -> Self {
        Self { fraction: 0.05, degree_band: 0.10, seed: 0 }
    }
}

impl SeedingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.fraction) {
            return Err(Error::Domain(format!("outlier fraction {} outside [0, 0.5)", self.fraction)));
        }
        if !(self.degree_band > 0.0 && self.degree_band < 1.0) {
            return Err(Error::Domain(format!("degree band {} outside (0, 1)", self.degree_band)));
        }
        Ok(())
    }

    /// `⌈fraction·n⌉`, ignoring float noise just above an integer.
    pub fn total(&self, n: usize) -> usize {
        (self.fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
    }

    /// Counts per type: an equal split with the remainder assigned
    /// round-robin in [`OutlierKind::ALL`] order.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let total = self.total(n);
        let mut counts = [total / 3; 3];
        counts.iter_mut().take(total % 3).for_each(|c| *c += 1);
        counts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierKind {
    /// Edges outside its class, keywords from it.
    Structural,
    /// Edges inside its class, keywords from the other classes.
    Attribute,
    /// Edges inside one class, keywords from another single class.
    Combined,
}

impl OutlierKind {
    pub const ALL: [OutlierKind; 3] = [Self::Structural, Self::Attribute, Self::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Structural => "structural",
            Self::Attribute => "attribute",
            Self::Combined => "combined",
        }
    }
}

impl fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutlierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown outlier type {s:?}")))
    }
}

/// A node to be appended to the network.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedNode {
    pub kind: OutlierKind,
    /// Original nodes it links to, ascending.
    pub neighbors: Vec<usize>,
    /// Dense attribute row.
    pub attributes: Vec<f64>,
    /// Class its edges are consistent with (or avoid, for structural
    /// outliers); also its label.
    pub structure_class: usize,
    /// Class its keywords come from; `None` when pooled from all classes
    /// but `structure_class`.
    pub attribute_class: Option<usize>,
    /// True when the degree band held no integer and the rounded class mean
    /// degree was used instead.
    pub band_fallback: bool,
}

/// Empirical keyword statistics of a set of nodes.
#[derive(Clone, Debug)]
struct KeywordProfile {
    nnz_counts: Vec<usize>,
    /// Number of nodes with each attribute nonzero.
    frequency: Vec<f64>,
    value_sum: Vec<f64>,
}

impl KeywordProfile {
    fn of(net: &AttributedNetwork, members: &[usize]) -> Self {
        let d = net.n_attributes();
        let mut p =
            Self { nnz_counts: Vec::with_capacity(members.len()), frequency: vec![0.0; d], value_sum: vec![0.0; d] };
        for &i in members {
            let mut nnz = 0;
            for (j, &v) in net.attributes().row(i).iter().enumerate() {
                if v != 0.0 {
                    nnz += 1;
                    p.frequency[j] += 1.0;
                    p.value_sum[j] += v;
                }
            }
            p.nnz_counts.push(nnz);
        }
        p
    }

    fn pooled<'a>(profiles: impl Iterator<Item = &'a KeywordProfile>) -> Self {
        let mut out: Option<Self> = None;
        for p in profiles {
            match &mut out {
                None => out = Some(p.clone()),
                Some(o) => {
                    o.nnz_counts.extend_from_slice(&p.nnz_counts);
                    o.frequency.iter_mut().zip(&p.frequency).for_each(|(a, b)| *a += b);
                    o.value_sum.iter_mut().zip(&p.value_sum).for_each(|(a, b)| *a += b);
                }
            }
        }
        out.expect("at least one profile")
    }

    /// Draws a nonzero count from the empirical count distribution, then
    /// that many distinct keywords by frequency. Values are 1 for binary
    /// data and the profile's mean nonzero value otherwise.
    fn sample(&self, binary: bool, rng: &mut Rng) -> Vec<f64> {
        let mut row = vec![0.0; self.frequency.len()];
        if self.nnz_counts.is_empty() {
            return row;
        }
        let nnz = self.nnz_counts[rng.below(self.nnz_counts.len())];
        for j in rng.weighted_sample(&self.frequency, nnz) {
            row[j] = if binary { 1.0 } else { self.value_sum[j] / self.frequency[j] };
        }
        row
    }
}

/// Per-class statistics of the original network, shared by all planters.
#[derive(Clone, Debug)]
pub struct Planter {
    n_nodes: usize,
    degree_band: f64,
    binary: bool,
    members: Vec<Vec<usize>>,
    distribution: Vec<f64>,
    mean_degree: Vec<f64>,
    profiles: Vec<KeywordProfile>,
}

impl Planter {
    pub fn new(net: &AttributedNetwork, plan: &SeedingPlan) -> Result<Self> {
        plan.validate()?;
        let members = net.class_members()?;
        if members.len() < 2 {
            return Err(Error::Selection(format!(
                "outlier planting needs at least 2 classes, found {}",
                members.len()
            )));
        }
        let mean_degree = members
            .iter()
            .map(|m| {
                let total: usize = m.iter().map(|&i| net.degree(i)).sum();
                if m.is_empty() {
                    0.0
                } else {
                    total as f64 / m.len() as f64
                }
            })
            .collect();
        let profiles = members.iter().map(|m| KeywordProfile::of(net, m)).collect();
        Ok(Self {
            n_nodes: net.n_nodes(),
            degree_band: plan.degree_band,
            binary: net.attributes_are_binary(),
            distribution: net.class_distribution()?,
            members,
            mean_degree,
            profiles,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.members.len()
    }

    pub fn mean_degree(&self, class: usize) -> f64 {
        self.mean_degree[class]
    }

    /// Inclusive integer degree range `[⌈(1−b)m⌉, ⌊(1+b)m⌋]`, at least 1.
    /// `None` when the band contains no admissible integer.
    pub fn degree_range(&self, class: usize) -> Option<(usize, usize)> {
        let m = self.mean_degree[class];
        let lo = ((1.0 - self.degree_band) * m - 1e-9).ceil().max(1.0) as usize;
        let hi = ((1.0 + self.degree_band) * m + 1e-9).floor() as usize;
        (lo <= hi).then_some((lo, hi))
    }

    fn pick_class(&self, rng: &mut Rng, exclude: Option<usize>) -> Result<usize> {
        let weights: Vec<f64> =
            self.distribution.iter().enumerate().map(|(c, &p)| if Some(c) == exclude { 0.0 } else { p }).collect();
        rng.weighted_index(&weights).ok_or_else(|| Error::Selection("no class available to select".into()))
    }

    fn pick_degree(&self, class: usize, rng: &mut Rng) -> (usize, bool) {
        match self.degree_range(class) {
            Some((lo, hi)) => (lo + rng.below(hi - lo + 1), false),
            None => {
                let d = self.mean_degree[class].round().max(1.0) as usize;
                log::warn!(
                    "degree band around {:.3} for class {class} holds no integer; using {d}",
                    self.mean_degree[class]
                );
                (d, true)
            }
        }
    }

    fn pick_neighbors(&self, pool: &[usize], degree: usize, class: usize, rng: &mut Rng) -> Result<Vec<usize>> {
        if pool.len() < degree {
            return Err(Error::Selection(format!(
                "class {class} offers {} candidate neighbors, {degree} needed",
                pool.len()
            )));
        }
        let mut picked = rng.sample(pool, degree);
        picked.sort_unstable();
        Ok(picked)
    }

    fn outside(&self, class: usize) -> Vec<usize> {
        let inside = &self.members[class];
        (0..self.n_nodes).filter(|i| inside.binary_search(i).is_err()).collect()
    }

    fn others_profile(&self, class: usize) -> KeywordProfile {
        KeywordProfile::pooled(self.profiles.iter().enumerate().filter(|(c, _)| *c != class).map(|(_, p)| p))
    }

    /// Links entirely outside a selected class, keywords from inside it.
    pub fn structural(&self, rng: &mut Rng) -> Result<PlantedNode> {
        let class = self.pick_class(rng, None)?;
        let (degree, band_fallback) = self.pick_degree(class, rng);
        let neighbors = self.pick_neighbors(&self.outside(class), degree, class, rng)?;
        let attributes = self.profiles[class].sample(self.binary, rng);
        Ok(PlantedNode {
            kind: OutlierKind::Structural,
            neighbors,
            attributes,
            structure_class: class,
            attribute_class: Some(class),
            band_fallback,
        })
    }

    /// Links inside a selected class, keywords pooled from all others.
    pub fn attribute(&self, rng: &mut Rng) -> Result<PlantedNode> {
        let class = self.pick_class(rng, None)?;
        let (degree, band_fallback) = self.pick_degree(class, rng);
        let neighbors = self.pick_neighbors(&self.members[class], degree, class, rng)?;
        let attributes = self.others_profile(class).sample(self.binary, rng);
        Ok(PlantedNode {
            kind: OutlierKind::Attribute,
            neighbors,
            attributes,
            structure_class: class,
            attribute_class: None,
            band_fallback,
        })
    }

    /// Links inside class `c₁`, keywords from one other class `c₂`.
    pub fn combined(&self, rng: &mut Rng) -> Result<PlantedNode> {
        let c1 = self.pick_class(rng, None)?;
        let c2 = self.pick_class(rng, Some(c1))?;
        let (degree, band_fallback) = self.pick_degree(c1, rng);
        let neighbors = self.pick_neighbors(&self.members[c1], degree, c1, rng)?;
        let attributes = self.profiles[c2].sample(self.binary, rng);
        Ok(PlantedNode {
            kind: OutlierKind::Combined,
            neighbors,
            attributes,
            structure_class: c1,
            attribute_class: Some(c2),
            band_fallback,
        })
    }

    pub fn plant(&self, kind: OutlierKind, rng: &mut Rng) -> Result<PlantedNode> {
        match kind {
            OutlierKind::Structural => self.structural(rng),
            OutlierKind::Attribute => self.attribute(rng),
            OutlierKind::Combined => self.combined(rng),
        }
    }
}

pub fn plant_structural(net: &AttributedNetwork, plan: &SeedingPlan, rng: &mut Rng) -> Result<PlantedNode> {
    Planter::new(net, plan)?.structural(rng)
}

pub fn plant_attribute(net: &AttributedNetwork, plan: &SeedingPlan, rng: &mut Rng) -> Result<PlantedNode> {
    Planter::new(net, plan)?.attribute(rng)
}

pub fn plant_combined(net: &AttributedNetwork, plan: &SeedingPlan, rng: &mut Rng) -> Result<PlantedNode> {
    Planter::new(net, plan)?.combined(rng)
}
