use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Factor matrices of the joint objective.
///
/// `A ≈ G·H` (structure), `C ≈ U·V` (attributes) and `G ≈ U·Wᵀ` with
/// orthogonal `W` (agreement between the two views).
#[derive(Clone, Debug, PartialEq)]
pub struct OneModel {
    /// `N×K` structure embedding.
    pub g: DenseMatrix,
    /// `K×N`.
    pub h: DenseMatrix,
    /// `N×K` attribute embedding.
    pub u: DenseMatrix,
    /// `K×D`.
    pub v: DenseMatrix,
    /// `K×K` orthogonal map from attribute to structure space.
    pub w: DenseMatrix,
}

impl OneModel {
    pub fn n(&self) -> usize {
        self.g.rows()
    }

    pub fn k(&self) -> usize {
        self.g.cols()
    }

    pub fn d(&self) -> usize {
        self.v.cols()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (n, k, d) = (self.n(), self.k(), self.d());
        let ok = self.h.shape() == (k, n)
            && self.u.shape() == (n, k)
            && self.v.shape() == (k, d)
            && self.w.shape() == (k, k);
        if !ok {
            return Err(Error::Dimension(format!(
                "inconsistent factor shapes: G {:?}, H {:?}, U {:?}, V {:?}, W {:?}",
                self.g.shape(),
                self.h.shape(),
                self.u.shape(),
                self.v.shape(),
                self.w.shape()
            )));
        }
        Ok(())
    }
}

/// Per-node outlier scores for structure (`o1`), attributes (`o2`) and
/// view disagreement (`o3`). Each vector sums to the outlier budget `mu`
/// and every entry lies in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutlierScores {
    pub o1: Vec<f64>,
    pub o2: Vec<f64>,
    pub o3: Vec<f64>,
}

impl OutlierScores {
    pub fn uniform(n: usize, mu: f64) -> Self {
        let v = vec![mu / n as f64; n];
        Self { o1: v.clone(), o2: v.clone(), o3: v }
    }

    pub fn len(&self) -> usize {
        self.o1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.o1.is_empty()
    }
}

/// `ln(1/oᵢ)` for every score, rejecting scores outside `(0, 1]`.
pub fn loss_multipliers(scores: &[f64]) -> Result<Vec<f64>> {
    scores
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            if o > 0.0 && o <= 1.0 {
                Ok(-o.ln() + 0.0)
            } else {
                Err(Error::Domain(format!("outlier score {o} of node {i} outside (0, 1]")))
            }
        })
        .collect()
}
