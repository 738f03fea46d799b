//! Closed-form updates of the factor matrices.
//!
//! Each of `G`, `H`, `U`, `V` is updated one coordinate at a time, every
//! coordinate set to the exact minimizer of the joint loss with everything
//! else held fixed. Sweeps are Gauss–Seidel: a coordinate sees the values
//! written by the ones before it.
//!
//! The quantities a coordinate update needs but does not change (Gram
//! matrices, products with the fixed factors) are gathered once per sweep
//! in a `*Update` context. A coordinate of `G` only couples to its own row
//! and a coordinate of `H` only to its own column (likewise `U` and `V`),
//! so rows (columns) are swept independently and in parallel; the result is
//! identical to the sequential `(row asc, k asc)` sweep.

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{svd_small, DenseMatrix, MatrixView, SparseMatrix};

use super::model::loss_multipliers;
use super::{LossWeights, OneModel, OutlierScores};

/// Denominators below this leave the coordinate unchanged.
pub const DEGENERATE_DENOM: f64 = 1e-12;

/// Coordinates skipped because their denominator vanished.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateStats {
    pub degenerate: usize,
}

fn check_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} produced non-finite values")))
    }
}

/// Gauss–Seidel pass over one row (or column); returns the number of
/// degenerate coordinates.
fn sweep_block(x: &mut [f64], mut coordinate: impl FnMut(&[f64], usize) -> Option<f64>) -> usize {
    let mut degenerate = 0;
    for k in 0..x.len() {
        match coordinate(x, k) {
            Some(v) => x[k] = v,
            None => degenerate += 1,
        }
    }
    degenerate
}

/// `Σ_{k'≠k} x[k'] · m[k'][k]`.
#[inline]
fn off_diagonal(x: &[f64], m: &DenseMatrix, k: usize) -> f64 {
    x.iter().enumerate().filter(|&(kk, _)| kk != k).map(|(kk, &xv)| xv * m[(kk, k)]).sum()
}

/// Context for coordinate updates of the structure embedding `G`.
pub struct GUpdate {
    /// `A·Hᵀ`, `N×K`.
    aht: DenseMatrix,
    /// `H·Hᵀ`, `K×K`.
    hht: DenseMatrix,
    /// `U·Wᵀ`, `N×K`.
    uwt: DenseMatrix,
    w1: Vec<f64>,
    w3: Vec<f64>,
    beta: f64,
}

impl GUpdate {
    pub fn prepare(a: &SparseMatrix, model: &OneModel, scores: &OutlierScores, beta: f64) -> Result<Self> {
        model.check_shapes()?;
        if a.rows() != model.n() || a.cols() != model.n() {
            return Err(Error::Dimension("adjacency does not match G".into()));
        }
        Ok(Self {
            aht: a.mul_dense(&model.h.transpose()),
            hht: model.h.matmul_t(&model.h)?,
            uwt: model.u.matmul_t(&model.w)?,
            w1: loss_multipliers(&scores.o1)?,
            w3: loss_multipliers(&scores.o3)?,
            beta,
        })
    }

    /// Minimizer of the joint loss in `G[i][k]`, given the current row
    /// `g_row` of `G`; `None` when the coordinate is degenerate.
    pub fn coordinate(&self, g_row: &[f64], i: usize, k: usize) -> Option<f64> {
        let (w1, w3) = (self.w1[i], self.w3[i]);
        let den = w1 * self.hht[(k, k)] + self.beta * w3;
        if den < DEGENERATE_DENOM {
            return None;
        }
        let num = w1 * (self.aht[(i, k)] - off_diagonal(g_row, &self.hht, k)) + self.beta * w3 * self.uwt[(i, k)];
        Some(num / den)
    }

    pub fn sweep(&self, g: &mut DenseMatrix) -> UpdateStats {
        let k = g.cols();
        let per_row = exec::map_range(g.rows(), |i| {
            let mut row = g.row(i).to_vec();
            let bad = sweep_block(&mut row, |x, kk| self.coordinate(x, i, kk));
            (row, bad)
        });
        collect_rows(g, k, per_row)
    }
}

fn collect_rows(m: &mut DenseMatrix, width: usize, rows: Vec<(Vec<f64>, usize)>) -> UpdateStats {
    let mut stats = UpdateStats::default();
    for (i, (row, bad)) in rows.into_iter().enumerate() {
        m.row_mut(i)[..width].copy_from_slice(&row);
        stats.degenerate += bad;
    }
    stats
}

/// Context for coordinate updates of `H`.
pub struct HUpdate {
    /// `Gᵀ·diag(w1)·A`, `K×N`.
    gwa: DenseMatrix,
    /// `Gᵀ·diag(w1)·G`, `K×K`.
    gwg: DenseMatrix,
}

impl HUpdate {
    pub fn prepare(a: &SparseMatrix, model: &OneModel, scores: &OutlierScores) -> Result<Self> {
        model.check_shapes()?;
        let w1 = loss_multipliers(&scores.o1)?;
        Ok(Self { gwa: a.weighted_t_mul(&model.g, Some(&w1)), gwg: model.g.weighted_t_mul(&model.g, Some(&w1)) })
    }

    /// Minimizer in `H[k][j]` given the current column `h_col` of `H`.
    pub fn coordinate(&self, h_col: &[f64], k: usize, j: usize) -> Option<f64> {
        let den = self.gwg[(k, k)];
        if den < DEGENERATE_DENOM {
            return None;
        }
        Some((self.gwa[(k, j)] - off_diagonal(h_col, &self.gwg, k)) / den)
    }

    pub fn sweep(&self, h: &mut DenseMatrix) -> UpdateStats {
        sweep_columns(h, |col, k, j| self.coordinate(col, k, j))
    }
}

/// Sweeps each column of `m` independently, writing results back in place.
fn sweep_columns(m: &mut DenseMatrix, coordinate: impl Fn(&[f64], usize, usize) -> Option<f64> + Sync) -> UpdateStats {
    let (k, n) = m.shape();
    let mt = m.transpose();
    let per_col = exec::map_range(n, |j| {
        let mut col = mt.row(j).to_vec();
        let bad = sweep_block(&mut col, |x, kk| coordinate(x, kk, j));
        (col, bad)
    });
    let mut stats = UpdateStats::default();
    for (j, (col, bad)) in per_col.into_iter().enumerate() {
        for (kk, v) in col.into_iter().enumerate().take(k) {
            m[(kk, j)] = v;
        }
        stats.degenerate += bad;
    }
    stats
}

/// Context for coordinate updates of the attribute embedding `U`.
pub struct UUpdate {
    /// `C·Vᵀ`, `N×K`.
    cvt: DenseMatrix,
    /// `V·Vᵀ`.
    vvt: DenseMatrix,
    /// `G·W`, `N×K`.
    gw: DenseMatrix,
    /// `Wᵀ·W`.
    wtw: DenseMatrix,
    w2: Vec<f64>,
    w3: Vec<f64>,
    weights: LossWeights,
}

impl UUpdate {
    pub fn prepare<M: MatrixView>(
        c: &M,
        model: &OneModel,
        scores: &OutlierScores,
        weights: LossWeights,
    ) -> Result<Self> {
        model.check_shapes()?;
        if c.shape() != (model.n(), model.d()) {
            return Err(Error::Dimension("attributes do not match U·V".into()));
        }
        Ok(Self {
            cvt: c.mul_dense(&model.v.transpose()),
            vvt: model.v.matmul_t(&model.v)?,
            gw: model.g.matmul(&model.w)?,
            wtw: model.w.t_matmul(&model.w)?,
            w2: loss_multipliers(&scores.o2)?,
            w3: loss_multipliers(&scores.o3)?,
            weights,
        })
    }

    /// Minimizer in `U[i][k]` given the current row `u_row` of `U`.
    pub fn coordinate(&self, u_row: &[f64], i: usize, k: usize) -> Option<f64> {
        let a = self.weights.alpha * self.w2[i];
        let b = self.weights.beta * self.w3[i];
        let den = a * self.vvt[(k, k)] + b * self.wtw[(k, k)];
        if den < DEGENERATE_DENOM {
            return None;
        }
        let num = a * (self.cvt[(i, k)] - off_diagonal(u_row, &self.vvt, k))
            + b * (self.gw[(i, k)] - off_diagonal(u_row, &self.wtw, k));
        Some(num / den)
    }

    pub fn sweep(&self, u: &mut DenseMatrix) -> UpdateStats {
        let k = u.cols();
        let per_row = exec::map_range(u.rows(), |i| {
            let mut row = u.row(i).to_vec();
            let bad = sweep_block(&mut row, |x, kk| self.coordinate(x, i, kk));
            (row, bad)
        });
        collect_rows(u, k, per_row)
    }
}

/// Context for coordinate updates of `V`.
pub struct VUpdate {
    /// `Uᵀ·diag(w2)·C`, `K×D`.
    uwc: DenseMatrix,
    /// `Uᵀ·diag(w2)·U`.
    uwu: DenseMatrix,
}

impl VUpdate {
    pub fn prepare<M: MatrixView>(c: &M, model: &OneModel, scores: &OutlierScores) -> Result<Self> {
        model.check_shapes()?;
        let w2 = loss_multipliers(&scores.o2)?;
        Ok(Self { uwc: c.weighted_t_mul(&model.u, Some(&w2)), uwu: model.u.weighted_t_mul(&model.u, Some(&w2)) })
    }

    /// Minimizer in `V[k][d]` given the current column `v_col` of `V`.
    pub fn coordinate(&self, v_col: &[f64], k: usize, d: usize) -> Option<f64> {
        let den = self.uwu[(k, k)];
        if den < DEGENERATE_DENOM {
            return None;
        }
        Some((self.uwc[(k, d)] - off_diagonal(v_col, &self.uwu, k)) / den)
    }

    pub fn sweep(&self, v: &mut DenseMatrix) -> UpdateStats {
        sweep_columns(v, |col, k, d| self.coordinate(col, k, d))
    }
}

pub fn update_g(a: &SparseMatrix, model: &mut OneModel, scores: &OutlierScores, beta: f64) -> Result<UpdateStats> {
    let ctx = GUpdate::prepare(a, model, scores, beta)?;
    let stats = ctx.sweep(&mut model.g);
    check_finite(&model.g, "update_g")?;
    Ok(stats)
}

pub fn update_h(a: &SparseMatrix, model: &mut OneModel, scores: &OutlierScores) -> Result<UpdateStats> {
    let ctx = HUpdate::prepare(a, model, scores)?;
    let stats = ctx.sweep(&mut model.h);
    check_finite(&model.h, "update_h")?;
    Ok(stats)
}

pub fn update_u<M: MatrixView>(
    c: &M,
    model: &mut OneModel,
    scores: &OutlierScores,
    weights: LossWeights,
) -> Result<UpdateStats> {
    let ctx = UUpdate::prepare(c, model, scores, weights)?;
    let stats = ctx.sweep(&mut model.u);
    check_finite(&model.u, "update_u")?;
    Ok(stats)
}

pub fn update_v<M: MatrixView>(c: &M, model: &mut OneModel, scores: &OutlierScores) -> Result<UpdateStats> {
    let ctx = VUpdate::prepare(c, model, scores)?;
    let stats = ctx.sweep(&mut model.v);
    check_finite(&model.v, "update_v")?;
    Ok(stats)
}

/// Orthogonal `W` minimizing `Σᵢ ln(1/o3ᵢ) ‖Gᵢ − Uᵢ·Wᵀ‖²`.
///
/// With `Ḡ = diag(√ln(1/o3))·G` and `Ū` likewise, the loss is
/// `‖Ḡ − Ū·Wᵀ‖²`, minimized by `W = X·Yᵀ` where `X·Σ·Yᵀ = svd(ḠᵀŪ)`.
pub fn procrustes(g: &DenseMatrix, u: &DenseMatrix, o3: &[f64]) -> Result<DenseMatrix> {
    if g.shape() != u.shape() || o3.len() != g.rows() {
        return Err(Error::Dimension(format!(
            "G {:?}, U {:?} and {} scores do not conform",
            g.shape(),
            u.shape(),
            o3.len()
        )));
    }
    let w3 = loss_multipliers(o3)?;
    // ḠᵀŪ = Gᵀ·diag(w3)·U.
    let cross = u.weighted_t_mul(g, Some(&w3));
    let svd = svd_small(&cross)?;
    let w = svd.x.matmul_t(&svd.y)?;
    check_finite(&w, "update_w")?;
    Ok(w)
}

pub fn update_w(model: &mut OneModel, scores: &OutlierScores) -> Result<()> {
    model.check_shapes()?;
    model.w = procrustes(&model.g, &model.u, &scores.o3)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use crate::one::loss::{loss_disagreement, loss_joint};

    fn m(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    /// Scores whose multiplier ln(1/o) is exactly 1 in every slot.
    fn e_inv(n: usize) -> OutlierScores {
        let o = vec![(-1.0f64).exp(); n];
        OutlierScores { o1: o.clone(), o2: o.clone(), o3: o }
    }

    fn scalar_model(g: f64, h: f64, u: f64, v: f64, w: f64) -> OneModel {
        OneModel { g: m(&[vec![g]]), h: m(&[vec![h]]), u: m(&[vec![u]]), v: m(&[vec![v]]), w: m(&[vec![w]]) }
    }

    #[test]
    fn g_scalar() {
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 2.0)]).unwrap();
        let mut model = scalar_model(0.0, 1.0, 1.0, 1.0, 1.0);
        update_g(&a, &mut model, &e_inv(1), 1.0).unwrap();
        assert!((model.g[(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn g_without_disagreement_is_row_least_squares() {
        // H = I: each G row should reproduce the corresponding A row.
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 3.0), (1, 0, 3.0), (1, 1, 1.0)]).unwrap();
        let mut model = OneModel {
            g: DenseMatrix::zeros(2, 2),
            h: DenseMatrix::identity(2),
            u: DenseMatrix::zeros(2, 2),
            v: DenseMatrix::zeros(2, 1),
            w: DenseMatrix::identity(2),
        };
        update_g(&a, &mut model, &e_inv(2), 1e-14).unwrap();
        assert!(model.g.max_abs_diff(&a.to_dense()) < 1e-12);
    }

    #[test]
    fn h_scalar_and_degenerate() {
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 3.0)]).unwrap();
        let mut model = scalar_model(1.0, 0.0, 1.0, 1.0, 1.0);
        update_h(&a, &mut model, &e_inv(1)).unwrap();
        assert!((model.h[(0, 0)] - 3.0).abs() < 1e-15);

        let mut model = scalar_model(0.0, 0.7, 1.0, 1.0, 1.0);
        let stats = update_h(&a, &mut model, &e_inv(1)).unwrap();
        assert_eq!(model.h[(0, 0)], 0.7);
        assert_eq!(stats.degenerate, 1);
    }

    #[test]
    fn u_scalar() {
        let c = m(&[vec![2.0]]);
        let mut model = scalar_model(4.0, 1.0, 0.0, 1.0, 1.0);
        update_u(&c, &mut model, &e_inv(1), LossWeights::default()).unwrap();
        assert!((model.u[(0, 0)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn u_without_disagreement_fits_attributes() {
        let c = m(&[vec![2.0, 4.0]]);
        let mut model = OneModel {
            g: m(&[vec![100.0]]),
            h: m(&[vec![1.0]]),
            u: m(&[vec![0.0]]),
            v: m(&[vec![1.0, 2.0]]),
            w: m(&[vec![1.0]]),
        };
        update_u(&c, &mut model, &e_inv(1), LossWeights { alpha: 1.0, beta: 1e-13 }).unwrap();
        assert!((model.u[(0, 0)] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn v_scalar_and_degenerate() {
        let c = m(&[vec![5.0]]);
        let mut model = scalar_model(1.0, 1.0, 1.0, 0.0, 1.0);
        update_v(&c, &mut model, &e_inv(1)).unwrap();
        assert!((model.v[(0, 0)] - 5.0).abs() < 1e-15);

        let mut model = scalar_model(1.0, 1.0, 0.0, 0.3, 1.0);
        update_v(&c, &mut model, &e_inv(1)).unwrap();
        assert_eq!(model.v[(0, 0)], 0.3);
    }

    #[test]
    fn w_identity_when_views_agree() {
        let mut rng = Rng::seed_from(2);
        let g = DenseMatrix::from_fn(6, 3, |_, _| rng.uniform(-1.0, 1.0));
        let w = procrustes(&g, &g, &[1.0 / 6.0; 6]).unwrap();
        assert!(w.max_abs_diff(&DenseMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn w_recovers_rotation_and_beats_grid() {
        let mut rng = Rng::seed_from(3);
        let g = DenseMatrix::from_fn(8, 2, |_, _| rng.uniform(-1.0, 1.0));
        let o3 = vec![0.125; 8];
        let theta: f64 = 0.7;
        let r = m(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]]);
        let u = g.matmul(&r).unwrap();
        let w = procrustes(&g, &u, &o3).unwrap();
        assert!(w.max_abs_diff(&r) < 1e-10);
        let best = loss_disagreement(&g, &u, &w, &o3).unwrap();
        assert!(best < 1e-20);
        // Brute force over rotations and reflections.
        for step in 0..3600 {
            let t = step as f64 * std::f64::consts::TAU / 3600.0;
            let (c, s) = (t.cos(), t.sin());
            for cand in [m(&[vec![c, -s], vec![s, c]]), m(&[vec![c, s], vec![s, -c]])] {
                assert!(loss_disagreement(&g, &u, &cand, &o3).unwrap() >= best);
            }
        }
    }

    #[test]
    fn sweeps_match_sequential_coordinates() {
        let mut rng = Rng::seed_from(8);
        let (n, d, k) = (7, 5, 3);
        let entries: Vec<_> = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .filter(|_| rng.bernoulli(0.4))
            .flat_map(|(i, j)| [(i, j, 1.0), (j, i, 1.0)])
            .collect();
        let a = SparseMatrix::from_triplets(n, n, entries).unwrap();
        let c = DenseMatrix::from_fn(n, d, |_, _| rng.next_f64());
        let model = OneModel {
            g: DenseMatrix::from_fn(n, k, |_, _| rng.next_f64()),
            h: DenseMatrix::from_fn(k, n, |_, _| rng.next_f64()),
            u: DenseMatrix::from_fn(n, k, |_, _| rng.next_f64()),
            v: DenseMatrix::from_fn(k, d, |_, _| rng.next_f64()),
            w: DenseMatrix::identity(k),
        };
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform(0.5, 1.5)).collect();
        let total: f64 = raw.iter().sum();
        let o: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let scores = OutlierScores { o1: o.clone(), o2: o.clone(), o3: o };
        let weights = LossWeights { alpha: 0.7, beta: 1.3 };

        let mut swept = model.clone();
        update_g(&a, &mut swept, &scores, weights.beta).unwrap();
        let ctx = GUpdate::prepare(&a, &model, &scores, weights.beta).unwrap();
        let mut manual = model.g.clone();
        for i in 0..n {
            for kk in 0..k {
                let row = manual.row(i).to_vec();
                manual[(i, kk)] = ctx.coordinate(&row, i, kk).unwrap();
            }
        }
        assert_eq!(manual, swept.g);

        let before = loss_joint(&a, &c, &model, &scores, weights).unwrap().total();
        let mut next = model.clone();
        update_g(&a, &mut next, &scores, weights.beta).unwrap();
        update_h(&a, &mut next, &scores).unwrap();
        update_u(&c, &mut next, &scores, weights).unwrap();
        update_v(&c, &mut next, &scores).unwrap();
        let after = loss_joint(&a, &c, &next, &scores, weights).unwrap().total();
        assert!(after <= before);
    }
}
