//! The three weighted reconstruction losses and their joint sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{dot, row_residuals, DenseMatrix, MatrixView, SparseMatrix};

use super::model::loss_multipliers;
use super::{LossWeights, OneModel, OutlierScores};

fn weighted(residuals: &[f64], scores: &[f64]) -> Result<f64> {
    if residuals.len() != scores.len() {
        return Err(Error::Dimension(format!("{} scores for {} nodes", scores.len(), residuals.len())));
    }
    let m = loss_multipliers(scores)?;
    let terms: Vec<f64> = residuals.iter().zip(&m).map(|(r, w)| r * w).collect();
    Ok(exec::ordered_sum(&terms))
}

/// `Σᵢ ln(1/o1ᵢ) Σⱼ (Aᵢⱼ − Gᵢ·H·ⱼ)²`.
pub fn loss_structure(a: &SparseMatrix, g: &DenseMatrix, h: &DenseMatrix, o1: &[f64]) -> Result<f64> {
    weighted(&row_residuals(a, g, h)?, o1)
}

/// `Σᵢ ln(1/o2ᵢ) Σ_d (Cᵢd − Uᵢ·V·d)²`.
pub fn loss_attribute<M: MatrixView>(c: &M, u: &DenseMatrix, v: &DenseMatrix, o2: &[f64]) -> Result<f64> {
    weighted(&row_residuals(c, u, v)?, o2)
}

/// Per-node `Σₖ (Gᵢₖ − Uᵢ·(Wᵀ)·ₖ)²`.
pub fn disagreement_residuals(g: &DenseMatrix, u: &DenseMatrix, w: &DenseMatrix) -> Result<Vec<f64>> {
    let (n, k) = g.shape();
    if u.shape() != (n, k) || w.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "G {:?}, U {:?}, W {:?} do not conform",
            g.shape(),
            u.shape(),
            w.shape()
        )));
    }
    Ok(exec::map_range(n, |i| {
        let (gi, ui) = (g.row(i), u.row(i));
        (0..k)
            .map(|kk| {
                let r = gi[kk] - dot(ui, w.row(kk));
                r * r
            })
            .sum()
    }))
}

/// `Σᵢ ln(1/o3ᵢ) Σₖ (Gᵢₖ − Uᵢ·(Wᵀ)·ₖ)²`. Warns (without failing) when `W`
/// is not orthogonal.
pub fn loss_disagreement(g: &DenseMatrix, u: &DenseMatrix, w: &DenseMatrix, o3: &[f64]) -> Result<f64> {
    let residuals = disagreement_residuals(g, u, w)?;
    let err = w.orthogonality_error();
    if err > 1e-6 {
        log::warn!("disagreement loss evaluated with non-orthogonal W (error {err:.2e})");
    }
    weighted(&residuals, o3)
}

/// Component losses and the weights that combine them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub structure: f64,
    pub attribute: f64,
    pub disagreement: f64,
    pub weights: LossWeights,
}

impl LossBreakdown {
    /// `L_str + α·L_attr + β·L_dis`.
    pub fn total(&self) -> f64 {
        self.structure + self.weights.alpha * self.attribute + self.weights.beta * self.disagreement
    }
}

/// Joint objective for adjacency `a` and attribute matrix `c`.
pub fn loss_joint<M: MatrixView>(
    a: &SparseMatrix,
    c: &M,
    model: &OneModel,
    scores: &OutlierScores,
    weights: LossWeights,
) -> Result<LossBreakdown> {
    Ok(LossBreakdown {
        structure: loss_structure(a, &model.g, &model.h, &scores.o1)?,
        attribute: loss_attribute(c, &model.u, &model.v, &scores.o2)?,
        disagreement: loss_disagreement(&model.g, &model.u, &model.w, &scores.o3)?,
        weights,
    })
}
