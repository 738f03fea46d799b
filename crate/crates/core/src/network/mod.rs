//! Attributed network model and its file formats.

mod io;
mod result;

pub(crate) use io::{content_lines, read_text, write_all};
pub use io::{load_network, save_network, ATTRIBUTES_FILE, EDGES_FILE, LABELS_FILE};
pub use result::{
    load_result, read_embedding, read_scores, save_result, EmbeddingResult, ResultPaths, EMBEDDING_FILE, LOSS_FILE,
    SCORES_FILE,
};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SparseMatrix};

/// Per-node class assignment with dense ids `0..class_names.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Labels {
    pub ids: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Labels {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Oddities tolerated while loading.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadNotes {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Graph with per-node attribute vectors and optional class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedNetwork {
    adjacency: SparseMatrix,
    attributes: DenseMatrix,
    labels: Option<Labels>,
    node_names: Vec<String>,
    directed: bool,
    notes: LoadNotes,
}

impl AttributedNetwork {
    pub fn new(
        adjacency: SparseMatrix,
        attributes: DenseMatrix,
        labels: Option<Labels>,
        node_names: Vec<String>,
        directed: bool,
    ) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::Dimension(format!(
                "adjacency must be square, got {}x{}",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        if attributes.rows() != n {
            return Err(Error::Consistency(format!("{} attribute rows for {n} nodes", attributes.rows())));
        }
        if node_names.len() != n {
            return Err(Error::Consistency(format!("{} node names for {n} nodes", node_names.len())));
        }
        if !directed && !adjacency.is_symmetric() {
            return Err(Error::Consistency("undirected network with asymmetric adjacency".into()));
        }
        if let Some(l) = &labels {
            if l.ids.len() != n {
                return Err(Error::Consistency(format!("{} labels for {n} nodes", l.ids.len())));
            }
            if let Some(&bad) = l.ids.iter().find(|&&c| c >= l.n_classes()) {
                return Err(Error::Consistency(format!("label id {bad} outside {} classes", l.n_classes())));
            }
        }
        let self_loops = (0..n).filter(|&i| adjacency.get(i, i) != 0.0).count();
        Ok(Self {
            adjacency,
            attributes,
            labels,
            node_names,
            directed,
            notes: LoadNotes { self_loops, duplicate_edges: 0 },
        })
    }

    pub(crate) fn with_notes(mut self, notes: LoadNotes) -> Self {
        self.notes = notes;
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.cols()
    }

    /// Edge count: undirected edges are counted once.
    pub fn n_edges(&self) -> usize {
        if self.directed {
            self.adjacency.nnz()
        } else {
            (self.adjacency.nnz() + self.notes.self_loops) / 2
        }
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn attributes(&self) -> &DenseMatrix {
        &self.attributes
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(Labels::n_classes)
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn notes(&self) -> &LoadNotes {
        &self.notes
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency.row_nnz(node)
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        self.adjacency.row(node).0
    }

    /// Nodes of each class, ascending.
    pub fn class_members(&self) -> Result<Vec<Vec<usize>>> {
        let labels = self.require_labels()?;
        let mut members = vec![Vec::new(); labels.n_classes()];
        for (node, &c) in labels.ids.iter().enumerate() {
            members[c].push(node);
        }
        Ok(members)
    }

    /// Fraction of nodes in each class.
    pub fn class_distribution(&self) -> Result<Vec<f64>> {
        let n = self.n_nodes() as f64;
        Ok(self.class_members()?.iter().map(|m| m.len() as f64 / n).collect())
    }

    pub fn require_labels(&self) -> Result<&Labels> {
        self.labels.as_ref().ok_or_else(|| Error::State("network has no labels".into()))
    }

    /// True when every attribute value is 0 or 1.
    pub fn attributes_are_binary(&self) -> bool {
        self.attributes.as_slice().iter().all(|&v| v == 0.0 || v == 1.0)
    }
}
