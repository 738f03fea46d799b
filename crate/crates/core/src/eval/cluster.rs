use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub wcss_trace: Vec<f64>,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, ties to the lowest index.
fn nearest(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    (0..centroids.rows()).map(|c| (c, sq_dist(point, centroids.row(c)))).fold((0, f64::INFINITY), |best, cand| {
        if cand.1 < best.1 {
            cand
        } else {
            best
        }
    })
}

fn seed_centroids(points: &DenseMatrix, k: usize, rng: &mut Rng) -> DenseMatrix {
    let n = points.rows();
    let mut chosen = vec![rng.below(n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        // All remaining mass at zero means only duplicates are left.
        let next = rng.weighted_index(&d2).unwrap_or_else(|| (0..n).find(|i| !chosen.contains(i)).expect("k ≤ n"));
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    DenseMatrix::from_fn(k, points.cols(), |c, j| points[(chosen[c], j)])
}

/// k-means with D²-weighted seeding followed by Lloyd iterations until
/// the assignment stops changing or `max_iters` is reached. A cluster
/// that empties is moved onto the point farthest from its centroid.
pub fn kmeans_pp(points: &DenseMatrix, k: usize, rng: &mut Rng, max_iters: usize) -> Result<KMeansResult> {
    let (n, d) = points.shape();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("cannot form {k} clusters from {n} points")));
    }
    let mut centroids = seed_centroids(points, k, rng);
    let mut assignment: Vec<usize> = (0..n).map(|i| nearest(points.row(i), &centroids).0).collect();
    let mut wcss_trace = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters {
        let mut sums = DenseMatrix::zeros(k, d);
        let mut sizes = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            sizes[c] += 1;
            sums.row_mut(c).iter_mut().zip(points.row(i)).for_each(|(s, v)| *s += v);
        }
        for (c, &size) in sizes.iter().enumerate() {
            if size > 0 {
                let inv = 1.0 / size as f64;
                centroids.row_mut(c).iter_mut().zip(sums.row(c)).for_each(|(m, s)| *m = s * inv);
            }
        }
        // Refill empty clusters with the worst-served points.
        for c in 0..k {
            if sizes[c] != 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[assignment[i]] > 1)
                .map(|i| (i, sq_dist(points.row(i), centroids.row(assignment[i]))))
                .fold(None, |best: Option<(usize, f64)>, cand| match best {
                    Some(b) if b.1 >= cand.1 => Some(b),
                    _ => Some(cand),
                });
            if let Some((i, _)) = far {
                sizes[assignment[i]] -= 1;
                sizes[c] = 1;
                assignment[i] = c;
                centroids.row_mut(c).copy_from_slice(points.row(i));
            }
        }
        wcss_trace.push(wcss(points, &assignment, &centroids));

        let next: Vec<usize> = (0..n).map(|i| nearest(points.row(i), &centroids).0).collect();
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
    }
    Ok(KMeansResult { assignment, centroids, wcss_trace, converged })
}

pub fn wcss(points: &DenseMatrix, assignment: &[usize], centroids: &DenseMatrix) -> f64 {
    assignment.iter().enumerate().map(|(i, &c)| sq_dist(points.row(i), centroids.row(c))).sum()
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method
/// with potentials). Returns the column assigned to each row.
fn max_weight_assignment(weight: &[Vec<i64>]) -> Vec<usize> {
    let n = weight.len();
    let max = weight.iter().flatten().copied().max().unwrap_or(0);
    let cost = |i: usize, j: usize| max - weight[i][j];
    // 1-based arrays; index 0 is the virtual root.
    let (mut u, mut v) = (vec![0i64; n + 1], vec![0i64; n + 1]);
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = labels.iter().map(|l| distinct.binary_search(l).expect("present")).collect();
    (ids, distinct.len())
}

/// Best agreement between cluster ids and classes over one-to-one
/// relabelings of the clusters.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!("{} predictions vs {} labels", pred.len(), truth.len())));
    }
    if pred.is_empty() {
        return Err(Error::Domain("accuracy of an empty clustering".into()));
    }
    let (p, np) = dense_ids(pred);
    let (t, nt) = dense_ids(truth);
    let size = np.max(nt);
    let mut confusion = vec![vec![0i64; size]; size];
    for (&a, &b) in p.iter().zip(&t) {
        confusion[a][b] += 1;
    }
    let matched: i64 = max_weight_assignment(&confusion).iter().enumerate().map(|(r, &c)| confusion[r][c]).sum();
    Ok(matched as f64 / pred.len() as f64)
}
