//! Ground-truth outlier planting.
//!
//! Outliers are new nodes appended to a labeled network. A class is picked
//! with probability proportional to its size, the new node gets a degree
//! near that class's mean degree, and its edges and keywords are drawn so
//! that exactly one view (or the pairing of the two views) disagrees with
//! the class. All statistics come from the original network, so planted
//! nodes never link to each other.

mod plant;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{content_lines, load_network, read_text, save_network, write_all, AttributedNetwork, Labels};
use crate::network::{ATTRIBUTES_FILE, EDGES_FILE, LABELS_FILE};
use crate::numerics::{DenseMatrix, Rng, SparseMatrix};

pub use plant::{plant_attribute, plant_combined, plant_structural, OutlierKind, PlantedNode, Planter, SeedingPlan};
pub use synth::{synth_network, SynthConfig};

pub const TRUTH_FILE: &str = "truth.tsv";
pub const PROVENANCE_FILE: &str = "provenance.tsv";

/// Planted outlier ids per type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlierTruth {
    pub structural: Vec<usize>,
    pub attribute: Vec<usize>,
    pub combined: Vec<usize>,
}

impl OutlierTruth {
    pub fn of_kind(&self, kind: OutlierKind) -> &[usize] {
        match kind {
            OutlierKind::Structural => &self.structural,
            OutlierKind::Attribute => &self.attribute,
            OutlierKind::Combined => &self.combined,
        }
    }

    fn of_kind_mut(&mut self, kind: OutlierKind) -> &mut Vec<usize> {
        match kind {
            OutlierKind::Structural => &mut self.structural,
            OutlierKind::Attribute => &mut self.attribute,
            OutlierKind::Combined => &mut self.combined,
        }
    }

    /// All ids, ascending.
    pub fn all(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = OutlierKind::ALL.iter().flat_map(|&k| self.of_kind(k).iter().copied()).collect();
        ids.sort_unstable();
        ids
    }

    pub fn len(&self) -> usize {
        self.structural.len() + self.attribute.len() + self.combined.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How one planted node was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub node: usize,
    pub kind: OutlierKind,
    pub structure_class: usize,
    pub attribute_class: Option<usize>,
    pub degree: usize,
    pub band_fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeededDataset {
    /// Original nodes first, planted nodes appended.
    pub network: AttributedNetwork,
    pub original_nodes: usize,
    pub truth: OutlierTruth,
    pub provenance: Vec<Provenance>,
}

/// Name for the planted node with index `id`: its id when that is free,
/// otherwise a prefixed variant.
fn planted_name(id: usize, taken: &HashSet<&str>) -> String {
    let plain = id.to_string();
    if !taken.contains(plain.as_str()) {
        return plain;
    }
    (0..)
        .map(|k| if k == 0 { format!("planted-{id}") } else { format!("planted-{id}-{k}") })
        .find(|s| !taken.contains(s.as_str()))
        .expect("unbounded search")
}

fn augment(net: &AttributedNetwork, planted: &[PlantedNode]) -> Result<AttributedNetwork> {
    let n = net.n_nodes();
    let total = n + planted.len();
    let labels = net.require_labels()?;

    let mut entries: Vec<_> = net.adjacency().triplets().collect();
    for (p, node) in planted.iter().enumerate() {
        for &j in &node.neighbors {
            entries.push((n + p, j, 1.0));
            if !net.is_directed() {
                entries.push((j, n + p, 1.0));
            }
        }
    }
    let adjacency = SparseMatrix::from_triplets(total, total, entries)?;

    let d = net.n_attributes();
    let mut data = net.attributes().as_slice().to_vec();
    data.reserve(planted.len() * d);
    planted.iter().for_each(|p| data.extend_from_slice(&p.attributes));
    let attributes = DenseMatrix::from_vec(total, d, data)?;

    let mut ids = labels.ids.clone();
    ids.extend(planted.iter().map(|p| p.structure_class));
    let labels = Labels { ids, class_names: labels.class_names.clone() };

    let mut names = net.node_names().to_vec();
    let taken: HashSet<&str> = net.node_names().iter().map(String::as_str).collect();
    names.extend((0..planted.len()).map(|p| planted_name(n + p, &taken)));

    let out = AttributedNetwork::new(adjacency, attributes, Some(labels), names, net.is_directed())?;
    Ok(out.with_notes(net.notes().clone()))
}

/// Plants `⌈fraction·N⌉` outliers split equally across the three types.
///
/// Nodes are appended type by type (structural, attribute, combined); each
/// takes the label of the class its edges agree with, or avoid in the
/// structural case. The result depends only on `net` and `plan`.
pub fn seed_outliers(net: &AttributedNetwork, plan: &SeedingPlan) -> Result<SeededDataset> {
    plan.validate()?;
    let n = net.n_nodes();
    let counts = plan.counts(n);
    if counts.iter().sum::<usize>() == 0 {
        net.require_labels()?;
        return Ok(SeededDataset {
            network: net.clone(),
            original_nodes: n,
            truth: OutlierTruth::default(),
            provenance: Vec::new(),
        });
    }

    let planter = Planter::new(net, plan)?;
    let mut rng = Rng::substream(plan.seed, "seeding");
    let mut planted = Vec::new();
    let mut truth = OutlierTruth::default();
    let mut provenance = Vec::new();
    for (kind, &count) in OutlierKind::ALL.iter().zip(&counts) {
        for _ in 0..count {
            let node = planter.plant(*kind, &mut rng)?;
            let id = n + planted.len();
            truth.of_kind_mut(*kind).push(id);
            provenance.push(Provenance {
                node: id,
                kind: *kind,
                structure_class: node.structure_class,
                attribute_class: node.attribute_class,
                degree: node.neighbors.len(),
                band_fallback: node.band_fallback,
            });
            planted.push(node);
        }
    }
    Ok(SeededDataset { network: augment(net, &planted)?, original_nodes: n, truth, provenance })
}

/// Writes the truth file: a `node\ttype` header, then one line per
/// outlier in id order.
pub fn write_truth(path: impl AsRef<Path>, names: &[String], truth: &OutlierTruth) -> Result<()> {
    let mut rows: Vec<(usize, OutlierKind)> =
        OutlierKind::ALL.iter().flat_map(|&k| truth.of_kind(k).iter().map(move |&i| (i, k))).collect();
    rows.sort_unstable();
    write_all(path.as_ref(), |w| {
        writeln!(w, "node\ttype")?;
        for (i, k) in rows {
            writeln!(w, "{}\t{}", names[i], k)?;
        }
        Ok(())
    })
}

/// Reads a truth file, resolving names against `names`.
pub fn read_truth(path: impl AsRef<Path>, names: &[String]) -> Result<OutlierTruth> {
    let path = path.as_ref();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let text = read_text(path)?;
    let mut truth = OutlierTruth::default();
    let mut seen = HashSet::new();
    for (ln, line) in content_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields == ["node", "type"] {
            continue;
        }
        let [name, kind] = fields[..] else {
            return Err(Error::parse(path, ln, "expected `<node> <type>`"));
        };
        let &id = index.get(name).ok_or_else(|| Error::parse(path, ln, format!("unknown node {name:?}")))?;
        let kind: OutlierKind = kind.parse().map_err(|e: Error| Error::parse(path, ln, e.to_string()))?;
        if !seen.insert(id) {
            return Err(Error::parse(path, ln, format!("node {name:?} listed twice")));
        }
        truth.of_kind_mut(kind).push(id);
    }
    OutlierKind::ALL.iter().for_each(|&k| truth.of_kind_mut(k).sort_unstable());
    Ok(truth)
}

fn write_provenance(path: &Path, dataset: &SeededDataset) -> Result<()> {
    let labels = dataset.network.require_labels()?;
    let class = |c: usize| labels.class_names[c].as_str();
    let names = dataset.network.node_names();
    let mut body = String::from("node\ttype\tstructure_class\tattribute_class\tdegree\tband_fallback\n");
    for p in &dataset.provenance {
        let attr = p.attribute_class.map_or("*", class);
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{attr}\t{}\t{}",
            names[p.node],
            p.kind,
            class(p.structure_class),
            p.degree,
            p.band_fallback
        );
    }
    write_all(path, |w| w.write_all(body.as_bytes()))
}

/// Writes the augmented network files plus the truth and provenance files
/// under `dir`.
pub fn save_seeded(dataset: &SeededDataset, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut paths = save_network(&dataset.network, dir)?;
    let truth = dir.join(TRUTH_FILE);
    write_truth(&truth, dataset.network.node_names(), &dataset.truth)?;
    paths.push(truth);
    let provenance = dir.join(PROVENANCE_FILE);
    write_provenance(&provenance, dataset)?;
    paths.push(provenance);
    Ok(paths)
}

/// Loads a labeled network and its truth file from a directory written by
/// [`save_seeded`]; a missing truth file means no outliers.
pub fn load_seeded(dir: impl AsRef<Path>) -> Result<(AttributedNetwork, OutlierTruth)> {
    let dir = dir.as_ref();
    let net = load_network(dir.join(EDGES_FILE), dir.join(ATTRIBUTES_FILE), Some(&dir.join(LABELS_FILE)))?;
    let truth_path = dir.join(TRUTH_FILE);
    let truth = if truth_path.exists() { read_truth(&truth_path, net.node_names())? } else { OutlierTruth::default() };
    Ok((net, truth))
}
