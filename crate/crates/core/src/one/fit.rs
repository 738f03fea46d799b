use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{AttributedNetwork, EmbeddingResult};
use crate::numerics::{nmf_init, DenseMatrix, MatrixView, Rng, SparseMatrix};

use super::loss::{loss_joint, LossBreakdown};
use super::scores::{final_outlier_score, update_o1, update_o2, update_o3};
use super::update::{procrustes, update_g, update_h, update_u, update_v, update_w};
use super::{HyperParams, LossWeights, OneModel, OutlierScores};

/// Attribute matrices sparser than this are handled in CSR form.
const SPARSE_ATTRIBUTE_DENSITY: f64 = 0.25;

/// The attribute matrix in whichever layout is cheaper to multiply.
pub(crate) enum AttributeView<'a> {
    Dense(&'a DenseMatrix),
    Sparse(SparseMatrix),
}

impl<'a> AttributeView<'a> {
    /// Requires nonnegative attributes (checked by the caller).
    pub(crate) fn new(c: &'a DenseMatrix) -> Self {
        let nnz = c.as_slice().iter().filter(|&&v| v != 0.0).count();
        let total = c.as_slice().len().max(1);
        if (nnz as f64) / (total as f64) >= SPARSE_ATTRIBUTE_DENSITY {
            return AttributeView::Dense(c);
        }
        let entries = (0..c.rows())
            .flat_map(|i| c.row(i).iter().enumerate().filter(|(_, v)| **v > 0.0).map(move |(j, &v)| (i, j, v)))
            .collect();
        match SparseMatrix::from_triplets(c.rows(), c.cols(), entries) {
            Ok(s) => AttributeView::Sparse(s),
            Err(_) => AttributeView::Dense(c),
        }
    }
}

impl MatrixView for AttributeView<'_> {
    fn shape(&self) -> (usize, usize) {
        match self {
            AttributeView::Dense(m) => MatrixView::shape(*m),
            AttributeView::Sparse(m) => MatrixView::shape(m),
        }
    }

    #[inline]
    fn visit_row(&self, i: usize, f: impl FnMut(usize, f64)) {
        match self {
            AttributeView::Dense(m) => m.visit_row(i, f),
            AttributeView::Sparse(m) => m.visit_row(i, f),
        }
    }
}

/// Outcome of loss-weight calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub weights: LossWeights,
    /// True when a component loss vanished and `α = β = 1` was used.
    pub fallback: bool,
}

/// `α = L_str/L_attr`, `β = L_str/L_dis`, so the three weighted terms are
/// equal; falls back to `α = β = 1` when any component is zero.
pub fn calibrate_from_losses(structure: f64, attribute: f64, disagreement: f64) -> Calibration {
    let usable = |v: f64| v.is_finite() && v > 0.0;
    if usable(structure) && usable(attribute) && usable(disagreement) {
        let weights = LossWeights { alpha: structure / attribute, beta: structure / disagreement };
        if usable(weights.alpha) && usable(weights.beta) {
            return Calibration { weights, fallback: false };
        }
    }
    log::warn!("cannot balance losses ({structure}, {attribute}, {disagreement}); using alpha = beta = 1");
    Calibration { weights: LossWeights::default(), fallback: true }
}

/// Calibrates the loss weights at the given (initial) point.
pub fn calibrate_weights(net: &AttributedNetwork, model: &OneModel, scores: &OutlierScores) -> Result<Calibration> {
    let l = loss_joint(net.adjacency(), net.attributes(), model, scores, LossWeights::default())?;
    Ok(calibrate_from_losses(l.structure, l.attribute, l.disagreement))
}

/// Row `i` is `(Gᵢ + Uᵢ·Wᵀ) / 2`.
pub fn final_embedding(model: &OneModel) -> DenseMatrix {
    let mut out = model.u.matmul_t(&model.w).expect("conformal factors");
    for (o, g) in out.as_mut_slice().iter_mut().zip(model.g.as_slice()) {
        *o = (*o + g) / 2.0;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Joint loss at the initial point, with the fitted weights.
    pub initial_loss: Option<LossBreakdown>,
    /// Joint loss after each completed round.
    pub losses: Vec<LossBreakdown>,
    pub calibration_fallback: bool,
    /// Coordinates left unchanged because their denominator vanished.
    pub degenerate_coordinates: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Debug)]
pub struct FitOutput {
    pub model: OneModel,
    pub scores: OutlierScores,
    pub weights: LossWeights,
    pub result: EmbeddingResult,
    pub diagnostics: Diagnostics,
}

/// Nonnegative factorizations of `A` and `C` plus uniform scores; `W` is
/// aligned to the initial embeddings.
pub fn initialize(net: &AttributedNetwork, hp: &HyperParams) -> Result<(OneModel, OutlierScores)> {
    let attributes = AttributeView::new(net.attributes());
    initialize_with(net.adjacency(), &attributes, hp)
}

fn initialize_with<M: MatrixView>(a: &SparseMatrix, c: &M, hp: &HyperParams) -> Result<(OneModel, OutlierScores)> {
    let n = a.rows();
    let structure = nmf_init(a, hp.k, hp.nmf_sweeps, &mut Rng::substream(hp.seed, "init-structure"))?;
    let attribute = nmf_init(c, hp.k, hp.nmf_sweeps, &mut Rng::substream(hp.seed, "init-attributes"))?;
    let scores = OutlierScores::uniform(n, hp.mu);
    let w = procrustes(&structure.p, &attribute.p, &scores.o3)?;
    let model = OneModel { g: structure.p, h: structure.q, u: attribute.p, v: attribute.q, w };
    Ok((model, scores))
}

/// One outer iteration: `W`, then `G, H, U, V`, then the three score
/// vectors. Returns the number of degenerate coordinates.
pub fn run_round<M: MatrixView>(
    a: &SparseMatrix,
    c: &M,
    model: &mut OneModel,
    scores: &mut OutlierScores,
    weights: LossWeights,
    hp: &HyperParams,
) -> Result<usize> {
    update_w(model, scores)?;
    let mut degenerate = update_g(a, model, scores, weights.beta)?.degenerate;
    degenerate += update_h(a, model, scores)?.degenerate;
    degenerate += update_u(c, model, scores, weights)?.degenerate;
    degenerate += update_v(c, model, scores)?.degenerate;
    scores.o1 = update_o1(a, &model.g, &model.h, hp.mu, hp.eps_o)?;
    scores.o2 = update_o2(c, &model.u, &model.v, hp.mu, hp.eps_o)?;
    scores.o3 = update_o3(&model.g, &model.u, &model.w, hp.mu, hp.eps_o)?;
    Ok(degenerate)
}

/// Fits the joint embedding and outlier scores of `net`.
pub fn fit(net: &AttributedNetwork, hp: &HyperParams) -> Result<FitOutput> {
    let (n, d) = (net.n_nodes(), net.n_attributes());
    hp.validate(n, d)?;
    let a = net.adjacency();
    let c = AttributeView::new(net.attributes());

    let (mut model, mut scores) = initialize_with(a, &c, hp)?;
    let mut diagnostics = Diagnostics::default();
    let weights = match hp.weights {
        Some(w) => w,
        None => {
            let l = loss_joint(a, &c, &model, &scores, LossWeights::default())?;
            let cal = calibrate_from_losses(l.structure, l.attribute, l.disagreement);
            diagnostics.calibration_fallback = cal.fallback;
            cal.weights
        }
    };
    let initial = loss_joint(a, &c, &model, &scores, weights)?;
    log::info!("initial loss {:.6e} (alpha {:.4e}, beta {:.4e})", initial.total(), weights.alpha, weights.beta);
    diagnostics.initial_loss = Some(initial);

    let mut previous = initial.total();
    for round in 0..hp.iters {
        diagnostics.degenerate_coordinates += run_round(a, &c, &mut model, &mut scores, weights, hp)?;
        let loss = loss_joint(a, &c, &model, &scores, weights)?;
        let total = loss.total();
        if !total.is_finite() {
            return Err(Error::Numeric(format!("joint loss became {total} in round {}", round + 1)));
        }
        log::info!("round {}: loss {total:.6e}", round + 1);
        diagnostics.losses.push(loss);
        if let Some(tol) = hp.tol {
            if (previous - total).abs() <= tol * previous.abs() {
                diagnostics.stopped_early = true;
                break;
            }
        }
        previous = total;
    }

    let combined = final_outlier_score(&scores, hp.combine_weights)?;
    let result = EmbeddingResult {
        node_names: net.node_names().to_vec(),
        embedding: final_embedding(&model),
        scores: scores.clone(),
        combined,
        loss_trace: diagnostics.losses.iter().map(LossBreakdown::total).collect(),
    };
    Ok(FitOutput { model, scores, weights, result, diagnostics })
}
