use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// ℓ2 penalty on the weights (not the biases).
    pub reg: f64,
    pub steps: usize,
    pub step_size: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { reg: 1e-3, steps: 500, step_size: 0.1 }
    }
}

/// Multinomial logistic regression on per-dimension standardized features.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `d × classes`.
    weights: DenseMatrix,
    bias: Vec<f64>,
}

fn standardizer(x: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows() as f64;
    let d = x.cols();
    let mut mean = vec![0.0; d];
    for i in 0..x.rows() {
        mean.iter_mut().zip(x.row(i)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for i in 0..x.rows() {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale = var.iter().map(|s| (s / n).sqrt()).map(|sd| if sd > 1e-12 { sd } else { 1.0 }).collect();
    (mean, scale)
}

fn standardize(x: &DenseMatrix, mean: &[f64], scale: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - mean[j]) / scale[j])
}

/// Row-wise softmax of `x·W + b`, in place of the logits.
fn softmax_rows(logits: &mut DenseMatrix) {
    let c = logits.cols();
    exec::for_each_row_mut(logits.as_mut_slice(), c, |_, row| {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.iter_mut().for_each(|v| *v = (*v - max).exp());
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    });
}

fn logits(x: &DenseMatrix, weights: &DenseMatrix, bias: &[f64]) -> DenseMatrix {
    let mut z = x.matmul(weights).expect("feature dims checked");
    let c = z.cols();
    exec::for_each_row_mut(z.as_mut_slice(), c, |_, row| {
        row.iter_mut().zip(bias).for_each(|(v, b)| *v += b);
    });
    z
}

fn check_inputs(x: &DenseMatrix, y: &[usize], n_classes: usize) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Dimension(format!("{} feature rows vs {} labels", x.rows(), y.len())));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::Domain(format!("label {bad} outside {n_classes} classes")));
    }
    let first = y.first().copied();
    if y.iter().all(|&c| Some(c) == first) {
        return Err(Error::Domain("degenerate fit: training labels hold fewer than 2 classes".into()));
    }
    Ok(())
}

/// Fits the classifier by full-batch gradient descent from zero weights.
pub fn train_classifier(
    x: &DenseMatrix,
    y: &[usize],
    n_classes: usize,
    cfg: &ClassifierConfig,
) -> Result<LogisticRegression> {
    train_classifier_traced(x, y, n_classes, cfg).map(|(m, _)| m)
}

/// As [`train_classifier`], also returning the regularized training loss
/// before each step and after the last one.
pub fn train_classifier_traced(
    x: &DenseMatrix,
    y: &[usize],
    n_classes: usize,
    cfg: &ClassifierConfig,
) -> Result<(LogisticRegression, Vec<f64>)> {
    check_inputs(x, y, n_classes)?;
    let (n, d) = x.shape();
    let (mean, scale) = standardizer(x);
    let xs = standardize(x, &mean, &scale);
    let mut weights = DenseMatrix::zeros(d, n_classes);
    let mut bias = vec![0.0; n_classes];
    let mut trace = Vec::with_capacity(cfg.steps + 1);

    for step in 0..=cfg.steps {
        let mut p = logits(&xs, &weights, &bias);
        softmax_rows(&mut p);
        let ce: f64 = y.iter().enumerate().map(|(i, &c)| -p[(i, c)].max(f64::MIN_POSITIVE).ln()).sum::<f64>();
        trace.push(ce / n as f64 + 0.5 * cfg.reg * weights.frobenius_sq());
        if step == cfg.steps {
            break;
        }
        // p ← (P − Y)/n, the gradient with respect to the logits.
        for (i, &c) in y.iter().enumerate() {
            p.row_mut(i)[c] -= 1.0;
        }
        p.scale(1.0 / n as f64);
        let grad_w = xs.t_matmul(&p).expect("shapes agree");
        for (w, g) in weights.as_mut_slice().iter_mut().zip(grad_w.as_slice()) {
            *w -= cfg.step_size * (g + cfg.reg * *w);
        }
        for (b, c) in bias.iter_mut().zip(0..n_classes) {
            let g: f64 = (0..n).map(|i| p[(i, c)]).sum();
            *b -= cfg.step_size * g;
        }
    }
    Ok((LogisticRegression { mean, scale, weights, bias }, trace))
}

impl LogisticRegression {
    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    /// Most probable class per row; ties go to the lowest class id.
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        if x.cols() != self.mean.len() {
            return Err(Error::Dimension(format!("classifier expects {} features, got {}", self.mean.len(), x.cols())));
        }
        let z = logits(&standardize(x, &self.mean, &self.scale), &self.weights, &self.bias);
        Ok((0..z.rows())
            .map(|i| {
                z.row(i)
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
                    .0
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn blobs(seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut rng = Rng::seed_from(seed);
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let x = DenseMatrix::from_fn(40, 2, |i, _| {
            let centre = if y[i] == 0 { -2.0 } else { 2.0 };
            centre + rng.uniform(-1.0, 1.0)
        });
        (x, y)
    }

    #[test]
    fn separable_training_accuracy() {
        let (x, y) = blobs(1);
        let model = train_classifier(&x, &y, 2, &ClassifierConfig::default()).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
    }

    #[test]
    fn loss_non_increasing() {
        let (x, y) = blobs(2);
        let (_, trace) = train_classifier_traced(&x, &y, 2, &ClassifierConfig::default()).unwrap();
        assert_eq!(trace.len(), 501);
        assert!((trace[0] - 2f64.ln()).abs() < 1e-12);
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn order_invariant() {
        let (x, y) = blobs(3);
        let perm: Vec<usize> = (0..40).rev().collect();
        let xp = DenseMatrix::from_fn(40, 2, |i, j| x[(perm[i], j)]);
        let yp: Vec<usize> = perm.iter().map(|&i| y[i]).collect();
        let cfg = ClassifierConfig::default();
        let a = train_classifier(&x, &y, 2, &cfg).unwrap();
        let b = train_classifier(&xp, &yp, 2, &cfg).unwrap();
        assert!(a.weights.max_abs_diff(&b.weights) < 1e-12);
        assert!(a.bias.iter().zip(&b.bias).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = DenseMatrix::zeros(3, 2);
        assert!(train_classifier(&x, &[1, 1, 1], 2, &ClassifierConfig::default()).is_err());
        assert!(train_classifier(&x, &[0, 1], 2, &ClassifierConfig::default()).is_err());
    }
}
