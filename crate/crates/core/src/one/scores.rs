//! Outlier-score updates.
//!
//! For fixed factors, each loss is `Σᵢ rᵢ·ln(1/oᵢ)` in its score vector,
//! where `rᵢ` is node `i`'s squared residual. Minimizing it subject to
//! `Σ oᵢ = μ` gives `oᵢ = μ·rᵢ / Σ r`. The raw formula assigns zero to a
//! perfectly reconstructed node, so scores are additionally kept in
//! `[eps_o, 1]`; the box-constrained minimizer is `oᵢ = clamp(t·rᵢ, eps_o, 1)`
//! with the scale `t` chosen to restore the sum, found exactly below.

use crate::error::{Error, Result};
use crate::numerics::{row_residuals, DenseMatrix, MatrixView, SparseMatrix};

use super::loss::disagreement_residuals;
use super::{CombineWeights, OutlierScores};

/// Totals below this are treated as an exact fit.
const ZERO_TOTAL: f64 = 1e-300;

/// Minimizer of `Σᵢ rᵢ·ln(1/oᵢ)` over `{o : Σ oᵢ = μ, eps ≤ oᵢ ≤ 1}`.
///
/// Falls back to uniform `μ/N` (with a warning) when every residual is
/// zero, since then every feasible point is optimal.
pub fn scores_from_residuals(residuals: &[f64], mu: f64, eps: f64) -> Result<Vec<f64>> {
    let n = residuals.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("score floor {eps} outside (0, 1)")));
    }
    if !(mu >= eps * n as f64 && mu <= n as f64) {
        return Err(Error::Domain(format!("budget {mu} infeasible for {n} scores in [{eps}, 1]")));
    }
    if let Some(r) = residuals.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::Numeric(format!("invalid residual {r}")));
    }
    let total: f64 = residuals.iter().sum();
    if total < ZERO_TOTAL {
        log::warn!("all residuals vanish; resetting scores to uniform");
        return Ok(vec![mu / n as f64; n]);
    }

    // S(t) = Σ clamp(t·rᵢ, eps, 1) is piecewise linear and nondecreasing.
    // Walk its breakpoints (node i leaves the floor at eps/rᵢ and reaches
    // the cap at 1/rᵢ) until S crosses mu, then solve on that segment.
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * n);
    for (i, &r) in residuals.iter().enumerate() {
        if r > 0.0 {
            events.push((eps / r, i, true));
            events.push((1.0 / r, i, false));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.2.cmp(&a.2)).then(a.1.cmp(&b.1)));

    let mut floored = n;
    let mut capped = 0usize;
    let mut free_sum = 0.0;
    let mut scale = None;
    for &(t, i, enters) in &events {
        let s = eps * floored as f64 + t * free_sum + capped as f64;
        if s >= mu && free_sum > 0.0 {
            scale = Some((mu - eps * floored as f64 - capped as f64) / free_sum);
            break;
        }
        if enters {
            floored -= 1;
            free_sum += residuals[i];
        } else {
            free_sum -= residuals[i];
            capped += 1;
        }
    }

    let mut scores = match scale {
        Some(t) => residuals.iter().map(|&r| (t * r).clamp(eps, 1.0)).collect(),
        None => {
            // Every positive-residual node is capped; the zero-residual
            // nodes absorb what is left of the budget.
            let mut s: Vec<f64> = residuals.iter().map(|&r| if r > 0.0 { 1.0 } else { eps }).collect();
            let zero = n - capped;
            let rest = (mu - capped as f64) / zero as f64;
            s.iter_mut().zip(residuals).filter(|(_, r)| **r == 0.0).for_each(|(v, _)| *v = rest.clamp(eps, 1.0));
            s
        }
    };
    // Rounding can leave capped or floored entries a hair outside the box.
    scores.iter_mut().for_each(|v| *v = v.clamp(eps, 1.0));
    Ok(scores)
}

pub fn update_o1(a: &SparseMatrix, g: &DenseMatrix, h: &DenseMatrix, mu: f64, eps: f64) -> Result<Vec<f64>> {
    scores_from_residuals(&row_residuals(a, g, h)?, mu, eps)
}

pub fn update_o2<M: MatrixView>(c: &M, u: &DenseMatrix, v: &DenseMatrix, mu: f64, eps: f64) -> Result<Vec<f64>> {
    scores_from_residuals(&row_residuals(c, u, v)?, mu, eps)
}

pub fn update_o3(g: &DenseMatrix, u: &DenseMatrix, w: &DenseMatrix, mu: f64, eps: f64) -> Result<Vec<f64>> {
    scores_from_residuals(&disagreement_residuals(g, u, w)?, mu, eps)
}

/// Per-node `w1·o1ᵢ + w2·o2ᵢ + w3·o3ᵢ`.
pub fn final_outlier_score(scores: &OutlierScores, weights: CombineWeights) -> Result<Vec<f64>> {
    weights.validate()?;
    let [w1, w2, w3] = weights.0;
    Ok(scores.o1.iter().zip(&scores.o2).zip(&scores.o3).map(|((a, b), c)| w1 * a + w2 * b + w3 * c).collect())
}
