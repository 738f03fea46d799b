//! Outlier-aware embedding of attributed networks.
//!
//! A node's structure (adjacency row) and content (attribute row) are each
//! factorized into a `K`-dimensional embedding. The two views are tied
//! together by an orthogonal map, and every node carries three outlier
//! scores (structure, attribute, disagreement) that down-weight its
//! contribution to the respective loss. All factors and scores are fitted
//! jointly by alternating closed-form minimization; see [`one::fit`].
//!
//! Besides the optimizer the crate ships the pieces needed to evaluate it:
//! a ground-truth outlier planter ([`seeder`]) and the usual downstream
//! metrics ([`eval`]).
//!
//! Row-wise kernels run on rayon when the `parallel` feature is enabled
//! (the default). Every reduction has a fixed order, so results are
//! bit-identical regardless of thread count.

pub mod error;
pub mod eval;
pub(crate) mod exec;
pub mod network;
pub mod numerics;
pub mod one;
pub mod seeder;

pub use error::{Error, Result};
pub use network::{AttributedNetwork, EmbeddingResult};
pub use numerics::{DenseMatrix, Rng, SparseMatrix};
pub use one::{fit, FitOutput, HyperParams, OneModel, OutlierScores};
