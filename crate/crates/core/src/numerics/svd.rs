//! Full SVD of small square matrices by one-sided (Hestenes) Jacobi.
//!
//! Only `K×K` cross-product matrices are ever decomposed here, with `K` in
//! the tens, so the cubic cost per sweep is irrelevant next to the
//! factor updates.

use crate::error::{Error, Result};

use super::DenseMatrix;

const MAX_SWEEPS: usize = 100;
const ROTATION_TOL: f64 = 1e-15;

/// `M = X · diag(sigma) · Yᵀ` with orthogonal `X`, `Y` and non-increasing,
/// nonnegative `sigma`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub x: DenseMatrix,
    pub sigma: Vec<f64>,
    pub y: DenseMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut xs = self.x.clone();
        for i in 0..xs.rows() {
            for (v, s) in xs.row_mut(i).iter_mut().zip(&self.sigma) {
                *v *= s;
            }
        }
        xs.matmul_t(&self.y).expect("square factors")
    }
}

/// Singular value decomposition of a square matrix.
///
/// Each column of `x` is signed so that its largest-magnitude entry is
/// positive (first one wins on ties); the matching column of `y` is flipped
/// along with it. Null-space columns of `x` are completed to an orthonormal
/// basis deterministically.
pub fn svd_small(m: &DenseMatrix) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::Dimension(format!("svd_small expects a square matrix, got {rows}x{cols}")));
    }
    if rows == 0 {
        return Err(Error::Dimension("svd_small of an empty matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("svd_small input has non-finite entries".into()));
    }
    let n = rows;

    // Columns of `a` are rotated until mutually orthogonal; `v` accumulates
    // the rotations so that m·v = a throughout. Column-major storage keeps
    // each column contiguous.
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= ROTATION_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = a.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    sigma = order.iter().map(|&j| sigma[j]).collect();
    let a: Vec<Vec<f64>> = order.iter().map(|&j| a[j].clone()).collect();
    let mut v: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();

    let scale = sigma[0];
    let null_tol = scale * n as f64 * f64::EPSILON;
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (col, &s) in a.iter().zip(&sigma) {
        if s > null_tol && s > 0.0 {
            u.push(col.iter().map(|x| x / s).collect());
        } else {
            u.push(complete_basis(&u, n));
        }
    }
    // Tiny singular values leave their left vectors poorly conditioned;
    // one modified Gram-Schmidt pass restores orthogonality.
    reorthogonalize(&mut u);

    for (uj, vj) in u.iter_mut().zip(v.iter_mut()) {
        let lead = uj
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1.abs() { (i, x) } else { best })
            .1;
        if lead < 0.0 {
            uj.iter_mut().for_each(|x| *x = -*x);
            vj.iter_mut().for_each(|x| *x = -*x);
        }
    }

    Ok(SvdResult {
        x: DenseMatrix::from_fn(n, n, |i, j| u[j][i]),
        sigma,
        y: DenseMatrix::from_fn(n, n, |i, j| v[j][i]),
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// First standard basis vector with the largest component orthogonal to
/// `basis`, normalized.
fn complete_basis(basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut best = vec![0.0; n];
    let mut best_norm = -1.0;
    for e in 0..n {
        let mut cand = vec![0.0; n];
        cand[e] = 1.0;
        for b in basis {
            let proj = b[e];
            cand.iter_mut().zip(b).for_each(|(c, x)| *c -= proj * x);
        }
        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > best_norm + 1e-12 {
            best_norm = norm;
            best = cand;
        }
    }
    best.iter_mut().for_each(|x| *x /= best_norm);
    best
}

fn reorthogonalize(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for b in done.iter() {
            let proj: f64 = b.iter().zip(col.iter()).map(|(x, y)| x * y).sum();
            col.iter_mut().zip(b).for_each(|(c, x)| *c -= proj * x);
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        col.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn assert_valid(m: &DenseMatrix, svd: &SvdResult) {
        assert!(svd.x.orthogonality_error() < 1e-9, "X not orthogonal");
        assert!(svd.y.orthogonality_error() < 1e-9, "Y not orthogonal");
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.sigma.iter().all(|&s| s >= 0.0));
        let err = svd.reconstruct().max_abs_diff(m);
        let scale = m.frobenius_sq().sqrt().max(1e-300);
        assert!(err / scale < 1e-8, "reconstruction error {err}");
    }

    /// Symmetric eigenvalues by cyclic Jacobi rotations; independent of the
    /// one-sided scheme under test.
    fn jacobi_eigenvalues(s: &DenseMatrix) -> Vec<f64> {
        let n = s.rows();
        let mut a = s.clone();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    let mut j = DenseMatrix::identity(n);
                    j[(p, p)] = c;
                    j[(q, q)] = c;
                    j[(p, q)] = sn;
                    j[(q, p)] = -sn;
                    a = j.t_matmul(&a).unwrap().matmul(&j).unwrap();
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    #[test]
    fn identity() {
        let m = DenseMatrix::identity(3);
        let svd = svd_small(&m).unwrap();
        assert_eq!(svd.sigma, vec![1.0, 1.0, 1.0]);
        assert_eq!(svd.x, m);
        assert_eq!(svd.y, m);
    }

    #[test]
    fn diagonal_is_signed_permutation() {
        let m = DenseMatrix::diag(&[2.0, -3.0]);
        let svd = svd_small(&m).unwrap();
        assert_eq!(svd.sigma, vec![3.0, 2.0]);
        for f in [&svd.x, &svd.y] {
            for v in f.as_slice() {
                assert!(*v == 0.0 || v.abs() == 1.0);
            }
        }
        assert_valid(&m, &svd);
    }

    #[test]
    fn random_reconstructs_and_matches_eigenvalues() {
        let mut rng = Rng::seed_from(11);
        for n in [1, 2, 4, 7] {
            let m = DenseMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
            let svd = svd_small(&m).unwrap();
            assert_valid(&m, &svd);
            let ev = jacobi_eigenvalues(&m.t_matmul(&m).unwrap());
            for (s, e) in svd.sigma.iter().zip(ev) {
                assert!((s * s - e).abs() < 1e-10, "{s}^2 vs {e}");
            }
        }
    }

    #[test]
    fn rank_deficient_and_zero() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.5, 1.0, 1.5]]).unwrap();
        let svd = svd_small(&m).unwrap();
        assert_valid(&m, &svd);
        assert!(svd.sigma[1] < 1e-12);

        let z = DenseMatrix::zeros(3, 3);
        let svd = svd_small(&z).unwrap();
        assert_valid(&z, &svd);
        assert_eq!(svd.sigma, vec![0.0; 3]);
    }

    #[test]
    fn sign_convention() {
        let mut rng = Rng::seed_from(3);
        let m = DenseMatrix::from_fn(5, 5, |_, _| rng.uniform(-1.0, 1.0));
        let svd = svd_small(&m).unwrap();
        for j in 0..5 {
            let col = svd.x.column(j);
            let lead = col.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(lead > 0.0);
        }
        let again = svd_small(&m).unwrap();
        assert_eq!(svd.x, again.x);
        assert_eq!(svd.y, again.y);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(svd_small(&DenseMatrix::zeros(2, 3)).is_err());
        assert!(svd_small(&DenseMatrix::zeros(0, 0)).is_err());
    }
}
