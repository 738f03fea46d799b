//! Nonnegative factorization by Lee–Seung multiplicative updates, used to
//! seed the optimizer's factor matrices.

use crate::error::{Error, Result};

use super::{frobenius_sq_residual, DenseMatrix, MatrixView, Rng};

pub const DEFAULT_NMF_SWEEPS: usize = 200;

/// Denominator floor inside the multiplicative updates.
const DENOM_FLOOR: f64 = 1e-12;

/// `M ≈ P · Q`, both factors entrywise nonnegative.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub p: DenseMatrix,
    pub q: DenseMatrix,
    /// Squared Frobenius error after each sweep; empty unless traced.
    pub trace: Vec<f64>,
}

/// Factorizes a nonnegative `M` into `rows×k` and `k×cols` nonnegative
/// factors with `sweeps` rounds of multiplicative updates, starting from
/// entries uniform in `(0.1, 1.0)`.
pub fn nmf_init<M: MatrixView>(m: &M, k: usize, sweeps: usize, rng: &mut Rng) -> Result<Factorization> {
    run(m, k, sweeps, rng, false)
}

/// [`nmf_init`], additionally recording the reconstruction error after
/// every sweep.
pub fn nmf_init_traced<M: MatrixView>(m: &M, k: usize, sweeps: usize, rng: &mut Rng) -> Result<Factorization> {
    run(m, k, sweeps, rng, true)
}

fn run<M: MatrixView>(m: &M, k: usize, sweeps: usize, rng: &mut Rng, trace: bool) -> Result<Factorization> {
    let (rows, cols) = m.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(Error::Dimension(format!("rank {k} out of range for a {rows}x{cols} matrix")));
    }
    if sweeps == 0 {
        return Err(Error::Domain("nmf needs at least one sweep".into()));
    }
    for i in 0..rows {
        let mut bad = None;
        m.visit_row(i, |j, v| {
            if bad.is_none() && !(v >= 0.0 && v.is_finite()) {
                bad = Some((j, v));
            }
        });
        if let Some((j, v)) = bad {
            return Err(Error::Domain(format!("nmf input must be finite and nonnegative; entry ({i}, {j}) is {v}")));
        }
    }

    let mut p = DenseMatrix::from_fn(rows, k, |_, _| rng.uniform(0.1, 1.0));
    let mut q = DenseMatrix::from_fn(k, cols, |_, _| rng.uniform(0.1, 1.0));
    let mut errors = Vec::new();

    for _ in 0..sweeps {
        // P ← P ∘ (M Qᵀ) / (P Q Qᵀ)
        let mqt = m.mul_dense(&q.transpose());
        let qqt = q.matmul_t(&q)?;
        let pqqt = p.matmul(&qqt)?;
        multiplicative_step(&mut p, &mqt, &pqqt);

        // Q ← Q ∘ (Pᵀ M) / (Pᵀ P Q)
        let ptm = m.weighted_t_mul(&p, None);
        let ptp = p.t_matmul(&p)?;
        let ptpq = ptp.matmul(&q)?;
        multiplicative_step(&mut q, &ptm, &ptpq);

        if trace {
            errors.push(frobenius_sq_residual(m, &p, &q)?);
        }
    }

    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Numeric("nmf produced non-finite factors".into()));
    }
    Ok(Factorization { p, q, trace: errors })
}

fn multiplicative_step(x: &mut DenseMatrix, num: &DenseMatrix, den: &DenseMatrix) {
    for ((v, n), d) in x.as_mut_slice().iter_mut().zip(num.as_slice()).zip(den.as_slice()) {
        *v *= n / d.max(DENOM_FLOOR);
    }
}
