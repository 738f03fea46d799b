//! Matrix containers, seeded randomness and the small dense kernels shared
//! by the optimizer and the evaluation code.

mod dense;
mod nmf;
mod rng;
mod sparse;
mod svd;

pub(crate) use dense::dot;
pub use dense::DenseMatrix;
pub use nmf::{nmf_init, nmf_init_traced, Factorization, DEFAULT_NMF_SWEEPS};
pub use rng::Rng;
pub use sparse::SparseMatrix;
pub use svd::{svd_small, SvdResult};

use crate::error::{Error, Result};
use crate::exec;

/// Row access shared by dense and sparse inputs to the factorizations.
pub trait MatrixView: Sync {
    fn shape(&self) -> (usize, usize);

    /// Calls `f(col, value)` for every stored entry of row `i`, columns
    /// ascending. Dense matrices visit zeros too.
    fn visit_row(&self, i: usize, f: impl FnMut(usize, f64));

    /// `self · b` for `b` of shape `cols × k`.
    fn mul_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        let (rows, cols) = self.shape();
        assert_eq!(cols, b.rows(), "mul_dense shape mismatch");
        let k = b.cols();
        let mut out = DenseMatrix::zeros(rows, k);
        exec::for_each_row_mut(out.as_mut_slice(), k, |i, out_row| {
            self.visit_row(i, |j, m| {
                if m != 0.0 {
                    out_row.iter_mut().zip(b.row(j)).for_each(|(o, x)| *o += m * x);
                }
            });
        });
        out
    }

    /// `pᵀ · diag(weights) · self` for `p` of shape `rows × k`; `weights`
    /// defaults to all ones.
    fn weighted_t_mul(&self, p: &DenseMatrix, weights: Option<&[f64]>) -> DenseMatrix {
        let (rows, cols) = self.shape();
        assert_eq!(rows, p.rows(), "weighted_t_mul shape mismatch");
        let k = p.cols();
        let mut out = DenseMatrix::zeros(k, cols);
        // One output row per latent dimension; each is accumulated over
        // source rows in ascending order.
        exec::for_each_row_mut(out.as_mut_slice(), cols, |kk, out_row| {
            for i in 0..rows {
                let coef = p[(i, kk)] * weights.map_or(1.0, |w| w[i]);
                if coef == 0.0 {
                    continue;
                }
                self.visit_row(i, |j, m| {
                    if m != 0.0 {
                        out_row[j] += coef * m;
                    }
                });
            }
        });
        out
    }
}

impl MatrixView for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        DenseMatrix::shape(self)
    }

    #[inline]
    fn visit_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        self.row(i).iter().enumerate().for_each(|(j, &v)| f(j, v));
    }
}

impl MatrixView for SparseMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    #[inline]
    fn visit_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let (cols, vals) = self.row(i);
        cols.iter().zip(vals).for_each(|(&j, &v)| f(j, v));
    }
}

fn check_factor_shapes(m: (usize, usize), p: &DenseMatrix, q: &DenseMatrix) -> Result<()> {
    if p.rows() != m.0 || q.cols() != m.1 || p.cols() != q.rows() {
        return Err(Error::Dimension(format!(
            "factors {}x{} · {}x{} do not match {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols(),
            m.0,
            m.1
        )));
    }
    Ok(())
}

/// Per-row squared residuals `Σⱼ (Mᵢⱼ − Pᵢ·Q·ⱼ)²`.
///
/// Every row is computed densely, so the cost is `rows · cols · k` even for
/// sparse `M`.
pub fn row_residuals<M: MatrixView>(m: &M, p: &DenseMatrix, q: &DenseMatrix) -> Result<Vec<f64>> {
    check_factor_shapes(m.shape(), p, q)?;
    let cols = q.cols();
    Ok(exec::map_range(p.rows(), |i| {
        let mut pred = vec![0.0; cols];
        for (k, &pik) in p.row(i).iter().enumerate() {
            if pik != 0.0 {
                pred.iter_mut().zip(q.row(k)).for_each(|(o, x)| *o += pik * x);
            }
        }
        m.visit_row(i, |j, v| pred[j] -= v);
        pred.iter().map(|r| r * r).sum()
    }))
}

/// `Σᵢⱼ (Mᵢⱼ − Pᵢ·Q·ⱼ)²`.
pub fn frobenius_sq_residual<M: MatrixView>(m: &M, p: &DenseMatrix, q: &DenseMatrix) -> Result<f64> {
    Ok(exec::ordered_sum(&row_residuals(m, p, q)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(m: &DenseMatrix, p: &DenseMatrix, q: &DenseMatrix) -> f64 {
        let mut total = 0.0;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let mut pred = 0.0;
                for k in 0..p.cols() {
                    pred += p[(i, k)] * q[(k, j)];
                }
                total += (m[(i, j)] - pred).powi(2);
            }
        }
        total
    }

    #[test]
    fn exact_factorization_is_zero() {
        let p = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let q = DenseMatrix::from_rows(&[vec![1.0, 0.0, 3.0], vec![2.0, 1.0, 1.0]]).unwrap();
        let m = p.matmul(&q).unwrap();
        assert_eq!(frobenius_sq_residual(&m, &p, &q).unwrap(), 0.0);
    }

    #[test]
    fn scalar_case() {
        let one = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let two = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        assert_eq!(frobenius_sq_residual(&two, &one, &one).unwrap(), 1.0);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = Rng::seed_from(5);
        let m = DenseMatrix::from_fn(5, 4, |_, _| rng.uniform(-1.0, 1.0));
        let p = DenseMatrix::from_fn(5, 3, |_, _| rng.uniform(-1.0, 1.0));
        let q = DenseMatrix::from_fn(3, 4, |_, _| rng.uniform(-1.0, 1.0));
        let got = frobenius_sq_residual(&m, &p, &q).unwrap();
        assert!((got - naive(&m, &p, &q)).abs() < 1e-12);
    }

    #[test]
    fn sparse_matches_dense() {
        let mut rng = Rng::seed_from(6);
        let entries: Vec<_> = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .filter(|_| rng.bernoulli(0.3))
            .map(|(i, j)| (i, j, 1.0 + (i + j) as f64))
            .collect();
        let s = SparseMatrix::from_triplets(6, 6, entries).unwrap();
        let d = s.to_dense();
        let mut rng = Rng::seed_from(7);
        let p = DenseMatrix::from_fn(6, 2, |_, _| rng.uniform(0.0, 1.0));
        let q = DenseMatrix::from_fn(2, 6, |_, _| rng.uniform(0.0, 1.0));
        let a = frobenius_sq_residual(&s, &p, &q).unwrap();
        let b = frobenius_sq_residual(&d, &p, &q).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(s.mul_dense(&q.transpose()).max_abs_diff(&d.mul_dense(&q.transpose())) < 1e-12);
        let w: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        assert!(s.weighted_t_mul(&p, Some(&w)).max_abs_diff(&d.weighted_t_mul(&p, Some(&w))) < 1e-12);
    }

    #[test]
    fn rejects_mismatched_factors() {
        let m = DenseMatrix::zeros(2, 2);
        let p = DenseMatrix::zeros(2, 1);
        let q = DenseMatrix::zeros(2, 2);
        assert!(frobenius_sq_residual(&m, &p, &q).is_err());
    }
}
