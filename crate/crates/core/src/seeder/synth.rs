use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{AttributedNetwork, Labels};
use crate::numerics::{DenseMatrix, Rng, SparseMatrix};

/// Parameters of a labeled stochastic-block-model network with
/// class-conditional binary attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub n_classes: usize,
    /// Edge probability between two nodes of the same class.
    pub p_in: f64,
    /// Edge probability across classes.
    pub p_out: f64,
    pub n_attrs: usize,
    /// Fraction of a node's nonzero attributes drawn from its own class
    /// block; the rest come from the other blocks.
    pub attr_signal: f64,
    /// Per-node nonzero count is uniform in this inclusive range.
    pub nnz_range: (usize, usize),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_nodes: 300,
            n_classes: 3,
            p_in: 0.05,
            p_out: 0.005,
            n_attrs: 300,
            attr_signal: 0.9,
            nnz_range: (10, 20),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Domain(msg));
        if self.n_classes == 0 || self.n_nodes < self.n_classes {
            return fail(format!("{} nodes cannot fill {} classes", self.n_nodes, self.n_classes));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return fail(format!("edge probabilities ({}, {}) outside [0, 1]", self.p_in, self.p_out));
        }
        if self.p_in <= self.p_out {
            return fail(format!("p_in {} must exceed p_out {}", self.p_in, self.p_out));
        }
        if !(self.attr_signal > 0.0 && self.attr_signal <= 1.0) {
            return fail(format!("attr_signal {} outside (0, 1]", self.attr_signal));
        }
        if self.n_attrs < self.n_classes {
            return fail(format!("{} attributes cannot form {} keyword blocks", self.n_attrs, self.n_classes));
        }
        let (lo, hi) = self.nnz_range;
        if lo == 0 || lo > hi {
            return fail(format!("nonzero range {lo}..={hi} is empty or starts at 0"));
        }
        Ok(())
    }

    /// Class of node `i`: classes occupy contiguous, near-equal id blocks.
    pub fn class_of(&self, i: usize) -> usize {
        i * self.n_classes / self.n_nodes
    }

    /// Attribute range owned by class `c`.
    pub fn keyword_block(&self, c: usize) -> std::ops::Range<usize> {
        let d = self.n_attrs;
        c * d / self.n_classes..(c + 1) * d / self.n_classes
    }
}

/// Generates the network described by `cfg`.
pub fn synth_network(cfg: &SynthConfig) -> Result<AttributedNetwork> {
    cfg.validate()?;
    let n = cfg.n_nodes;
    let class: Vec<usize> = (0..n).map(|i| cfg.class_of(i)).collect();

    let mut rng = Rng::substream(cfg.seed, "synth-edges");
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if class[i] == class[j] { cfg.p_in } else { cfg.p_out };
            if rng.bernoulli(p) {
                entries.push((i, j, 1.0));
                entries.push((j, i, 1.0));
            }
        }
    }
    let adjacency = SparseMatrix::from_triplets(n, n, entries)?;

    let mut rng = Rng::substream(cfg.seed, "synth-attributes");
    let mut attributes = DenseMatrix::zeros(n, cfg.n_attrs);
    for (i, &c) in class.iter().enumerate() {
        let own: Vec<usize> = cfg.keyword_block(c).collect();
        let other: Vec<usize> = (0..cfg.n_attrs).filter(|j| !cfg.keyword_block(c).contains(j)).collect();
        let (lo, hi) = cfg.nnz_range;
        let nnz = lo + rng.below(hi - lo + 1);
        let from_own = (0..nnz).filter(|_| rng.bernoulli(cfg.attr_signal)).count();
        let row = attributes.row_mut(i);
        for j in rng.sample(&own, from_own) {
            row[j] = 1.0;
        }
        for j in rng.sample(&other, nnz - from_own) {
            row[j] = 1.0;
        }
    }

    let labels = Labels { ids: class, class_names: (0..cfg.n_classes).map(|c| format!("class{c}")).collect() };
    let names = (0..n).map(|i| i.to_string()).collect();
    AttributedNetwork::new(adjacency, attributes, Some(labels), names, false)
}
