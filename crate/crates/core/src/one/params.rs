use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::AttributedNetwork;
use crate::numerics::DEFAULT_NMF_SWEEPS;

/// Convex weights combining the structure, attribute and disagreement
/// scores into one per-node outlier score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombineWeights(pub [f64; 3]);

impl Default for CombineWeights {
    /// Attribute score counts double.
    fn default() -> Self {
        Self([0.25, 0.5, 0.25])
    }
}

impl CombineWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        let w = Self([w1, w2, w3]);
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain(format!("combine weights must be finite and nonnegative, got {:?}", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("combine weights must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

/// Weights of the attribute and disagreement losses relative to the
/// structure loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("alpha and beta must be positive, got {alpha}, {beta}")));
        }
        Ok(Self { alpha, beta })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Embedding dimension.
    pub k: usize,
    /// Fixed loss weights; `None` calibrates them so that the three losses
    /// contribute equally at initialization.
    pub weights: Option<LossWeights>,
    /// Sum of every outlier-score vector.
    pub mu: f64,
    /// Outer iterations.
    pub iters: usize,
    /// Lower bound on every outlier score.
    pub eps_o: f64,
    pub combine_weights: CombineWeights,
    pub seed: u64,
    /// Multiplicative-update sweeps for factor initialization.
    pub nmf_sweeps: usize,
    /// Stop early once the relative loss change drops below this.
    pub tol: Option<f64>,
}

impl HyperParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            weights: None,
            mu: 1.0,
            iters: 5,
            eps_o: 1e-8,
            combine_weights: CombineWeights::default(),
            seed: 0,
            nmf_sweeps: DEFAULT_NMF_SWEEPS,
            tol: None,
        }
    }

    /// Defaults with `k` set to three times the number of classes.
    pub fn for_network(net: &AttributedNetwork) -> Result<Self> {
        let classes = net
            .n_classes()
            .ok_or_else(|| Error::State("embedding dimension must be given for unlabeled networks".into()))?;
        Ok(Self::new(3 * classes))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }

    /// Checks the parameters against a network with `n` nodes and `d`
    /// attributes.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.k == 0 || self.k > n.min(d) {
            return Err(Error::Domain(format!(
                "embedding dimension {} must lie in 1..={} for {n} nodes and {d} attributes",
                self.k,
                n.min(d)
            )));
        }
        if self.k == n.min(d) && n.min(d) > 1 {
            log::warn!("embedding dimension {} is not below min(N, D)", self.k);
        }
        if let Some(w) = self.weights {
            LossWeights::new(w.alpha, w.beta)?;
        }
        if !(self.eps_o > 0.0 && self.eps_o < 1.0) {
            return Err(Error::Domain(format!("eps_o must lie in (0, 1), got {}", self.eps_o)));
        }
        if !(self.mu.is_finite() && self.mu >= self.eps_o * n as f64 && self.mu <= n as f64) {
            return Err(Error::Domain(format!("mu = {} infeasible for {n} scores in [{}, 1]", self.mu, self.eps_o)));
        }
        if self.nmf_sweeps == 0 {
            return Err(Error::Domain("nmf_sweeps must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Domain(format!("tol must be nonnegative, got {t}")));
            }
        }
        self.combine_weights.validate()
    }
}
